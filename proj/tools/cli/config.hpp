#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include <starris/experiment.hpp>

namespace starris::cli {

// Angular box and Doppler range in config units (degrees, Hz).
struct RegionSpec {
    double az_min_deg, az_max_deg;
    double el_min_deg, el_max_deg;
    double doppler_min_hz, doppler_max_hz;
    bool operator==(const RegionSpec&) const = default;
};

struct ClutterSpec {
    int count;
    RegionSpec region;
    bool operator==(const ClutterSpec&) const = default;
};

struct ArrayConfig {
    int n_y = 16;
    int n_z = 8;
    double spacing_y = 0.5;  // wavelengths
    double spacing_z = 0.5;
    bool operator==(const ArrayConfig&) const = default;
};

struct BeampatternConfig {
    std::string half_space = "reflective";
    double steer_t_az = 158, steer_t_el = 22;
    double steer_r_az = 22, steer_r_el = 22;
    double az_min = -89, az_max = 89, az_step = 1;
    double el_min = -89, el_max = 89, el_step = 1;
    bool operator==(const BeampatternConfig&) const = default;
};

// Everything a run needs, in the units of the config file.
struct RunConfig {
    double carrier_hz = 28e9;
    double pri_s = 0.5e-3;
    std::vector<Policy> policies{Policy::simultaneous};
    std::vector<int> pulses{16};
    ArrayConfig ris;
    ArrayConfig rx;
    RegionSpec target_t{155, 160, 20, 25, 500, 1000};
    RegionSpec target_r{20, 25, 20, 25, 500, 1000};
    ClutterSpec clutter_t{10, {200, 220, -40, -20, -125, 125}};
    ClutterSpec clutter_r{10, {-40, -20, -40, -20, -125, 125}};
    double cnr_db = 20;
    std::vector<double> snr_db;
    double target_far = 1e-2;
    int h0_trials = 10'000;
    int trials = 2'000;
    std::uint64_t seed = 1;
    int doppler_oversampling = 8;
    DopplerSearch search;
    double noise_variance = 1;
    bool frozen_scene = false;
    int threads = 1;
    BeampatternConfig beampattern;

    bool operator==(const RunConfig&) const = default;

    // Experiment for one (policy, P) case; angles converted to radians.
    ExperimentConfig experiment(const ScanningPolicy& policy) const;
    std::vector<ScanningPolicy> cases() const;

    // Throws ConfigError naming the offending key.
    void validate() const;
};

RunConfig from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

// `source` is a file path or the name of a built-in preset.
RunConfig load_config(const std::string& source);
RunConfig parse_config(const std::filesystem::path& path);
bool is_preset(const std::string& name);
RunConfig preset(const std::string& name);

// FNV-1a over the canonical JSON text, excluding execution-only keys
// (threads), so outputs do not depend on the worker count.
std::uint64_t config_hash(const RunConfig& config);
// Same, restricted to the keys that influence threshold calibration.
std::uint64_t calibration_hash(const RunConfig& config, const ScanningPolicy& policy);
std::string hex(std::uint64_t value);

}  // namespace starris::cli
