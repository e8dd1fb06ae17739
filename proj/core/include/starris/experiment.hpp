#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "starris/detector.hpp"
#include "starris/ris.hpp"
#include "starris/scene.hpp"

namespace starris {

// Angles in radians.
struct AngularBox {
    double az_min, az_max;
    double el_min, el_max;
};

struct DopplerRange {
    double min_hz, max_hz;
};

struct CellRegion {
    AngularBox box;
    DopplerRange doppler;
};

struct ClutterRegion {
    int count;
    AngularBox box;
    DopplerRange doppler;
};

struct ArraySpec {
    int n_y = 16;
    int n_z = 8;
    double spacing_y_wl = 0.5;  // in carrier wavelengths
    double spacing_z_wl = 0.5;
};

// Doppler search interval V.
//   full:      the whole unambiguous interval on the 1/(oversampling P T) lattice
//   targets:   the same lattice restricted to the hull of the target Doppler ranges
//   explicit:  min_hz, min_hz + step_hz, ... <= max_hz
struct DopplerSearch {
    enum class Mode { full, targets, explicit_range };
    Mode mode = Mode::full;
    double min_hz = 0.0;
    double max_hz = 0.0;
    double step_hz = 0.0;

    bool operator==(const DopplerSearch&) const = default;
};

struct ExperimentConfig {
    double carrier_hz = 28e9;
    double pri_s = 0.5e-3;
    ScanningPolicy policy{Policy::simultaneous, 16};
    ArraySpec ris;
    ArraySpec rx;
    CellRegion target_t{{deg_to_rad(155), deg_to_rad(160), deg_to_rad(20), deg_to_rad(25)}, {500, 1000}};
    CellRegion target_r{{deg_to_rad(20), deg_to_rad(25), deg_to_rad(20), deg_to_rad(25)}, {500, 1000}};
    ClutterRegion clutter_t{10, {deg_to_rad(200), deg_to_rad(220), deg_to_rad(-40), deg_to_rad(-20)}, {-125, 125}};
    ClutterRegion clutter_r{10, {deg_to_rad(-40), deg_to_rad(-20), deg_to_rad(-40), deg_to_rad(-20)}, {-125, 125}};
    double cnr_db = 20.0;
    std::vector<double> snr_db;
    double target_far = 1e-2;   // declared targets per CPI under H0
    int h0_trials = 10'000;
    int trials = 2'000;         // per sweep point
    std::uint64_t seed = 1;
    int doppler_oversampling = 8;
    DopplerSearch search;
    double noise_variance = 1.0;
    // Draw one environment and reuse it for every trial (profiling aid).
    bool frozen_scene = false;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

enum class Scenario { H0, H1t, H1r, H2 };

Scenario scenario_from_string(const std::string& name);
Hypothesis truth_of(Scenario s);

// Draw streams; the policy and SNR are deliberately not part of the key so
// that the compared configurations see the same random environments.
enum class Stream : std::uint64_t { calibration = 1, validation = 2, sweep = 3, detect = 4, audit = 5, beampattern = 6 };
std::uint64_t stream_id(Stream kind, int pulses);

double doppler_resolution(Policy policy, int pulses, double pri_s);

// One CPI's worth of randomness that does not depend on the hypothesis.
struct Environment {
    RadarSetup setup;
    StarRisProfile profile;
    Direction dir_t;
    Direction dir_r;
    double target_doppler_t;
    double target_doppler_r;
    std::vector<PointScatterer> clutter_t;  // variances calibrated to the CNR
    std::vector<PointScatterer> clutter_r;
};

// Draw order: feeder channel, cell directions (t, r), target Dopplers (t, r),
// transmissive clutter, reflective clutter.
Environment draw_environment(const ExperimentConfig& config, std::mt19937_64& rng);

DopplerGrid make_grid(const ExperimentConfig& config);

// Detector for one environment: the full GIC bank for simultaneous scanning,
// the split binary tests for sequential scanning.
class TrialDetector {
public:
    TrialDetector(const ExperimentConfig& config, const Environment& env);

    TrialStatistics statistics(const cvec& y) const;
    const DisturbanceModel& disturbance() const noexcept { return *disturbance_; }
    const DopplerGrid& grid() const noexcept { return grid_; }

private:
    std::shared_ptr<const DisturbanceModel> disturbance_;
    DopplerGrid grid_;
    std::optional<DetectorBank> bank_;
    std::optional<SequentialDetector> sequential_;
};

// Scene for `scenario` with both target amplitudes calibrated to snr_db.
Scene make_scene(const ExperimentConfig& config, const Environment& env, Scenario scenario,
                 double snr_db);

struct TrialRecord {
    Hypothesis truth = Hypothesis::H0;
    Decision decision;
    TrialStatistics statistics;
    std::optional<double> true_doppler_t;
    std::optional<double> true_doppler_r;
    double received_target_energy = 0.0;  // ||alpha_t h_t + alpha_r h_r||^2
};

TrialRecord run_trial(const ExperimentConfig& config, Scenario scenario, double snr_db, double eta,
                      std::mt19937_64& rng);

// Runs `count` trials with generators counter_rng(seed, stream, i). Result
// order follows the trial index, never the schedule.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, Scenario scenario, double snr_db,
                                    double eta, std::uint64_t stream, int count, int threads);

// Mean number of declared targets per CPI on a cached H0 sample.
double false_alarm_rate(std::span<const TrialStatistics> h0, double eta);

struct Calibration {
    double eta = 0.0;
    double achieved_far = 0.0;
    double target_far = 0.0;
    int trials = 0;
    std::vector<TrialStatistics> h0_statistics;
};

// Bisection on eta over the cached sample; the result is the bracket end whose
// rate is closest to target_far, and must be within rel_tolerance of it.
// Throws InsufficientTrialsError otherwise.
Calibration calibrate_from_cache(std::vector<TrialStatistics> h0, double target_far,
                                 double rel_tolerance = 0.1);

// Simulates h0_trials H0 CPIs (fresh environment each) and calibrates eta.
Calibration calibrate_threshold(const ExperimentConfig& config, int h0_trials, int threads);

struct SweepPoint {
    Policy policy;
    int pulses;
    double snr_db;
    double pd;
    double pd_ci;                    // Wilson 95% half-width
    std::optional<double> rmse_mps;  // absent when no H2 declarations
    std::optional<double> rmse_ci;   // jackknife 95% half-width
    double far_achieved;
    double eta;
    int trials;
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

// Wilson score interval half-width.
double wilson_half_width(int successes, int trials, double z = 1.959963984540054);

struct RmseSummary {
    std::optional<double> rmse;
    std::optional<double> half_width;
    int used_trials = 0;
};

// Velocity RMSE over trials with decided H2, averaged over both cells and
// paired cell-by-cell with the truth.
RmseSummary velocity_rmse(std::span<const TrialRecord> records, double carrier_hz);

using ProgressFn = std::function<void(const std::string&)>;

struct Threshold {
    double eta;
    double achieved_far;
};

// For every (policy, P) case: calibrate eta unless `cached` holds a value
// for that case (same index), then run config.trials H2 trials per SNR point.
SweepResult run_sweep(const ExperimentConfig& base, std::span<const ScanningPolicy> cases,
                      int threads, std::span<const std::optional<Threshold>> cached = {},
                      const ProgressFn& progress = {});

}  // namespace starris
