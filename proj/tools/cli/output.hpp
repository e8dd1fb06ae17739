#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace starris::cli {

// Writes to `<path>.partial` and renames on commit(); an uncommitted file is
// removed on destruction so failed runs leave nothing behind.
class OutputFile {
public:
    explicit OutputFile(std::filesystem::path path);
    ~OutputFile();
    OutputFile(const OutputFile&) = delete;
    OutputFile& operator=(const OutputFile&) = delete;

    std::ostream& stream() { return out_; }
    void commit();

private:
    std::filesystem::path path_;
    std::filesystem::path partial_;
    std::ofstream out_;
    bool committed_ = false;
};

}  // namespace starris::cli
