#include "output.hpp"

#include <system_error>

#include <starris/errors.hpp>

namespace starris::cli {

OutputFile::OutputFile(std::filesystem::path path)
    : path_(std::move(path)), partial_(path_.string() + ".partial") {
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw ConfigError("out: cannot write " + path_.string());
}

OutputFile::~OutputFile() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(partial_, ec);
    }
}

void OutputFile::commit() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
    std::filesystem::rename(partial_, path_);
    committed_ = true;
}

}  // namespace starris::cli
