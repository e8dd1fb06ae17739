#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>

#include "config.hpp"

namespace starris::cli {

void write_beampattern(const RunConfig& config, const std::filesystem::path& out);

struct CalibrateOptions {
    std::filesystem::path out = "calibration.json";
    std::optional<std::filesystem::path> stats_out;
};
void calibrate(const RunConfig& config, const CalibrateOptions& options, std::ostream& log);

struct DetectOptions {
    Scenario scenario = Scenario::H2;
    double snr_db = 20.0;
    std::optional<double> eta;
    std::optional<std::filesystem::path> calibration;
    std::uint64_t trial = 0;
};
void detect(const RunConfig& config, const DetectOptions& options, std::ostream& out);

struct SweepOptions {
    std::filesystem::path out = "sweep.csv";
    std::optional<std::filesystem::path> calibration;
    bool progress = false;
};
void sweep(const RunConfig& config, const SweepOptions& options, std::ostream& log);

std::string csv_preamble(const RunConfig& config);
std::string format_number(double value);

}  // namespace starris::cli
