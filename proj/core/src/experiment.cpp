#include "starris/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "starris/errors.hpp"
#include "starris/parallel.hpp"

namespace starris {

namespace {

void check_box(const AngularBox& box, HalfSpace half, const std::string& key) {
    const bool transmissive = half == HalfSpace::transmissive;
    const double lo = transmissive ? pi / 2 : -pi / 2;
    const double hi = transmissive ? 3 * pi / 2 : pi / 2;
    if (!(box.az_min <= box.az_max)) throw ConfigError(key + ": azimuth min must be <= max");
    if (!(box.az_min > lo && box.az_max < hi)) {
        throw ConfigError(key + ": azimuth must lie in " +
                          (transmissive ? std::string("(90, 270) degrees for the transmissive half-space")
                                        : std::string("(-90, 90) degrees for the reflective half-space")));
    }
    if (!(box.el_min <= box.el_max)) throw ConfigError(key + ": elevation min must be <= max");
    if (!(box.el_min > -pi / 2 && box.el_max < pi / 2)) {
        throw ConfigError(key + ": elevation must lie in (-90, 90) degrees");
    }
}

void check_doppler(const DopplerRange& range, double nu_max, const std::string& key) {
    if (!(range.min_hz <= range.max_hz)) throw ConfigError(key + ": Doppler min must be <= max");
    if (!(range.min_hz > -nu_max && range.max_hz <= nu_max)) {
        throw ConfigError(key + ": Doppler range must lie inside the unambiguous interval (+-" +
                          std::to_string(nu_max) + " Hz)");
    }
}

void check_array(const ArraySpec& a, const std::string& key) {
    if (a.n_y < 1 || a.n_z < 1) throw ConfigError(key + ": element counts must be >= 1");
    if (!(a.spacing_y_wl > 0) || !(a.spacing_z_wl > 0)) throw ConfigError(key + ": spacing must be > 0");
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Direction draw_direction(std::mt19937_64& rng, const AngularBox& box) {
    const double az = uniform(rng, box.az_min, box.az_max);
    const double el = uniform(rng, box.el_min, box.el_max);
    return Direction::from_radians(az, el);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(carrier_hz > 0)) throw ConfigError("carrier_hz: must be > 0");
    if (!(pri_s > 0)) throw ConfigError("pri_s: must be > 0");
    if (policy.pulses < 2 || policy.pulses % 2 != 0) {
        throw ConfigError("pulses: must be even and >= 2 (both scanning codes split the CPI in halves), got " +
                          std::to_string(policy.pulses));
    }
    check_array(ris, "ris_array");
    check_array(rx, "rx_array");
    const double nu_max = 0.5 / pri_s;
    check_box(target_t.box, HalfSpace::transmissive, "target_t");
    check_box(target_r.box, HalfSpace::reflective, "target_r");
    check_doppler(target_t.doppler, nu_max, "target_t");
    check_doppler(target_r.doppler, nu_max, "target_r");
    check_box(clutter_t.box, HalfSpace::transmissive, "clutter_t");
    check_box(clutter_r.box, HalfSpace::reflective, "clutter_r");
    check_doppler(clutter_t.doppler, nu_max, "clutter_t");
    check_doppler(clutter_r.doppler, nu_max, "clutter_r");
    if (clutter_t.count < 0 || clutter_r.count < 0) throw ConfigError("clutter count: must be >= 0");
    if (!std::isfinite(cnr_db)) throw ConfigError("cnr_db: must be finite");
    for (double s : snr_db) {
        if (!std::isfinite(s)) throw ConfigError("snr_db: values must be finite");
    }
    if (!(target_far > 0 && target_far < 2)) throw ConfigError("target_far: must lie in (0, 2)");
    if (h0_trials < 1) throw ConfigError("h0_trials: must be >= 1");
    if (trials < 1) throw ConfigError("trials: must be >= 1");
    if (doppler_oversampling < 1) throw ConfigError("doppler_oversampling: must be >= 1");
    if (search.mode == DopplerSearch::Mode::explicit_range) {
        if (!(search.step_hz > 0) || !(search.min_hz <= search.max_hz) ||
            !(search.min_hz > -nu_max) || !(search.max_hz < nu_max)) {
            throw ConfigError("doppler_search: need min <= max inside (+-" + std::to_string(nu_max) +
                              " Hz) and step > 0");
        }
    }
    if (!(noise_variance > 0)) throw ConfigError("noise_variance: must be > 0");
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "H0") return Scenario::H0;
    if (name == "H1t") return Scenario::H1t;
    if (name == "H1r") return Scenario::H1r;
    if (name == "H2") return Scenario::H2;
    throw ConfigError("unknown scenario '" + name + "' (expected H0, H1t, H1r or H2)");
}

Hypothesis truth_of(Scenario s) {
    switch (s) {
    case Scenario::H0: return Hypothesis::H0;
    case Scenario::H1t: return Hypothesis::H1t;
    case Scenario::H1r: return Hypothesis::H1r;
    case Scenario::H2: return Hypothesis::H2;
    }
    return Hypothesis::H0;
}

std::uint64_t stream_id(Stream kind, int pulses) {
    return (static_cast<std::uint64_t>(kind) << 32) | static_cast<std::uint32_t>(pulses);
}

double doppler_resolution(Policy policy, int pulses, double pri_s) {
    const double span = policy == Policy::simultaneous ? pulses : pulses / 2.0;
    return 1.0 / (span * pri_s);
}

Environment draw_environment(const ExperimentConfig& config, std::mt19937_64& rng) {
    const double wl = speed_of_light / config.carrier_hz;
    ArrayGeometry ris = ura_positions(config.ris.n_y, config.ris.n_z, config.ris.spacing_y_wl * wl,
                                      config.ris.spacing_z_wl * wl);
    ArrayGeometry rx = ura_positions(config.rx.n_y, config.rx.n_z, config.rx.spacing_y_wl * wl,
                                     config.rx.spacing_z_wl * wl);
    FeederChannel g = random_feeder_channel(ris.size(), rng);

    const Direction dir_t = draw_direction(rng, config.target_t.box);
    const Direction dir_r = draw_direction(rng, config.target_r.box);
    const double nu_t = uniform(rng, config.target_t.doppler.min_hz, config.target_t.doppler.max_hz);
    const double nu_r = uniform(rng, config.target_r.doppler.min_hz, config.target_r.doppler.max_hz);

    const PhaseProfiles xbar = synthesize_profiles(g, dir_t, dir_r, ris, wl);
    StarRisProfile profile = stack_profile(xbar.transmissive, xbar.reflective, make_codes(config.policy));

    RadarSetup setup{std::move(ris), std::move(rx), config.carrier_hz, config.pri_s, std::move(g)};

    const double cnr = db_to_linear(config.cnr_db);
    auto draw_clutter = [&](const ClutterRegion& region) {
        std::vector<PointScatterer> out;
        out.reserve(static_cast<std::size_t>(region.count));
        for (int k = 0; k < region.count; ++k) {
            PointScatterer c{draw_direction(rng, region.box),
                             uniform(rng, region.doppler.min_hz, region.doppler.max_hz), 0.0, {}};
            const double energy =
                space_time_factors(setup, profile, c.direction, c.doppler_hz).squared_norm();
            c.amplitude_variance =
                calibrate_amplitude_variance(cnr, energy, config.noise_variance, config.policy.pulses);
            out.push_back(c);
        }
        return out;
    };
    std::vector<PointScatterer> clutter_t = draw_clutter(config.clutter_t);
    std::vector<PointScatterer> clutter_r = draw_clutter(config.clutter_r);

    return Environment{std::move(setup), std::move(profile), dir_t, dir_r, nu_t, nu_r,
                       std::move(clutter_t), std::move(clutter_r)};
}

DopplerGrid make_grid(const ExperimentConfig& config) {
    switch (config.search.mode) {
    case DopplerSearch::Mode::explicit_range:
        return DopplerGrid::over_interval(config.search.min_hz, config.search.max_hz,
                                          config.search.step_hz, config.pri_s);
    case DopplerSearch::Mode::targets:
        return DopplerGrid::uniform(config.pri_s, config.policy.pulses, config.doppler_oversampling)
            .restricted(std::min(config.target_t.doppler.min_hz, config.target_r.doppler.min_hz),
                        std::max(config.target_t.doppler.max_hz, config.target_r.doppler.max_hz));
    case DopplerSearch::Mode::full:
        break;
    }
    return DopplerGrid::uniform(config.pri_s, config.policy.pulses, config.doppler_oversampling);
}

namespace {

Scene clutter_scene(const ExperimentConfig& config, const Environment& env) {
    Scene scene;
    scene.clutter_t = env.clutter_t;
    scene.clutter_r = env.clutter_r;
    scene.noise_variance = config.noise_variance;
    return scene;
}

}  // namespace

TrialDetector::TrialDetector(const ExperimentConfig& config, const Environment& env)
    : disturbance_(std::make_shared<const DisturbanceModel>(
          build_covariance(env.setup, clutter_scene(config, env), env.profile))),
      grid_(make_grid(config)) {
    // eta is applied later from the cached statistics
    if (config.policy.kind == Policy::sequential) {
        sequential_.emplace(SequentialDetector::build(*disturbance_, env.setup, env.profile, env.dir_t,
                                                      env.dir_r, grid_, 0.0));
    } else {
        bank_.emplace(DetectorBank::build(disturbance_, env.setup, env.profile, env.dir_t, env.dir_r,
                                          grid_, 0.0));
    }
}

TrialStatistics TrialDetector::statistics(const cvec& y) const {
    return sequential_ ? sequential_->statistics(y) : bank_->statistics(y);
}

Scene make_scene(const ExperimentConfig& config, const Environment& env, Scenario scenario,
                 double snr_db) {
    Scene scene = clutter_scene(config, env);
    const double snr = db_to_linear(snr_db);
    auto target = [&](const Direction& dir, double nu) {
        const double energy = space_time_factors(env.setup, env.profile, dir, nu).squared_norm();
        return PointScatterer{dir, nu,
                              calibrate_amplitude_variance(snr, energy, config.noise_variance,
                                                           config.policy.pulses),
                              {}};
    };
    if (scenario == Scenario::H1t || scenario == Scenario::H2) {
        scene.target_t = target(env.dir_t, env.target_doppler_t);
    }
    if (scenario == Scenario::H1r || scenario == Scenario::H2) {
        scene.target_r = target(env.dir_r, env.target_doppler_r);
    }
    return scene;
}

namespace {

TrialRecord evaluate(const ExperimentConfig& config, const Environment& env,
                     const TrialDetector& detector, Scenario scenario, double snr_db, double eta,
                     std::mt19937_64& rng) {
    const Scene scene = make_scene(config, env, scenario, snr_db);

    // Targets first, then clutter and noise: the same draw order as a single
    // synthesize_observation call on the full scene.
    Scene targets_only;
    targets_only.target_t = scene.target_t;
    targets_only.target_r = scene.target_r;
    targets_only.noise_variance = scene.noise_variance;
    const cvec signal = synthesize_observation(env.setup, targets_only, env.profile, rng, {.add_noise = false});
    const cvec y = signal + synthesize_observation(env.setup, clutter_scene(config, env), env.profile, rng);

    TrialRecord rec;
    rec.truth = truth_of(scenario);
    rec.statistics = detector.statistics(y);
    rec.decision = decide(rec.statistics, detector.grid(), eta, config.carrier_hz);
    if (scene.target_t) rec.true_doppler_t = scene.target_t->doppler_hz;
    if (scene.target_r) rec.true_doppler_r = scene.target_r->doppler_hz;
    rec.received_target_energy = signal.squaredNorm();
    return rec;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, Scenario scenario, double snr_db, double eta,
                      std::mt19937_64& rng) {
    const Environment env = draw_environment(config, rng);
    const TrialDetector detector(config, env);
    return evaluate(config, env, detector, scenario, snr_db, eta, rng);
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, Scenario scenario, double snr_db,
                                    double eta, std::uint64_t stream, int count, int threads) {
    config.validate();
    std::vector<TrialRecord> records(static_cast<std::size_t>(std::max(count, 0)));
    if (config.frozen_scene) {
        auto env_rng = counter_rng(config.seed, stream, std::numeric_limits<std::uint64_t>::max());
        const Environment env = draw_environment(config, env_rng);
        const TrialDetector detector(config, env);
        parallel_for(records.size(), threads, [&](std::size_t i) {
            auto rng = counter_rng(config.seed, stream, i);
            records[i] = evaluate(config, env, detector, scenario, snr_db, eta, rng);
        });
    } else {
        parallel_for(records.size(), threads, [&](std::size_t i) {
            auto rng = counter_rng(config.seed, stream, i);
            records[i] = run_trial(config, scenario, snr_db, eta, rng);
        });
    }
    return records;
}

double false_alarm_rate(std::span<const TrialStatistics> h0, double eta) {
    if (h0.empty()) return 0.0;
    long declared = 0;
    for (const auto& s : h0) {
        declared += declared_targets(select_hypothesis(s.max_t, s.max_r, s.max_pair, eta));
    }
    return static_cast<double>(declared) / static_cast<double>(h0.size());
}

Calibration calibrate_from_cache(std::vector<TrialStatistics> h0, double target_far,
                                 double rel_tolerance) {
    if (h0.empty()) throw InsufficientTrialsError("no H0 trials to calibrate on", 0.0, 0.0);
    if (!(target_far > 0)) throw ConfigError("target false-alarm rate must be > 0");

    // Above this penalty no trial declares anything.
    double hi = 0.0;
    for (const auto& s : h0) hi = std::max({hi, s.max_t, s.max_r, 0.5 * s.max_pair});
    double lo = 0.0;
    double rate_lo = false_alarm_rate(h0, lo);

    Calibration cal;
    cal.target_far = target_far;
    cal.trials = static_cast<int>(h0.size());

    if (rate_lo <= target_far) {
        cal.eta = lo;
        cal.achieved_far = rate_lo;
    } else {
        double rate_hi = false_alarm_rate(h0, hi);
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double rate = false_alarm_rate(h0, mid);
            if (rate > target_far) {
                lo = mid;
                rate_lo = rate;
            } else {
                hi = mid;
                rate_hi = rate;
            }
        }
        if (std::abs(rate_lo - target_far) < std::abs(rate_hi - target_far)) {
            cal.eta = lo;
            cal.achieved_far = rate_lo;
        } else {
            cal.eta = hi;
            cal.achieved_far = rate_hi;
        }
        if (std::abs(cal.achieved_far - target_far) > rel_tolerance * target_far) {
            throw InsufficientTrialsError(
                "cannot reach a false-alarm rate of " + std::to_string(target_far) + " with " +
                    std::to_string(h0.size()) + " H0 trials: nearest achievable rates are " +
                    std::to_string(rate_hi) + " and " + std::to_string(rate_lo),
                rate_hi, rate_lo);
        }
    }
    cal.h0_statistics = std::move(h0);
    return cal;
}

Calibration calibrate_threshold(const ExperimentConfig& config, int h0_trials, int threads) {
    config.validate();
    if (static_cast<double>(h0_trials) < 10.0 / config.target_far) {
        throw ConfigError("h0_trials: need at least 10 / target_far = " +
                          std::to_string(static_cast<long>(std::ceil(10.0 / config.target_far))) +
                          " trials to resolve the requested false-alarm rate");
    }
    const auto records = run_trials(config, Scenario::H0, 0.0, 0.0,
                                    stream_id(Stream::calibration, config.policy.pulses), h0_trials,
                                    threads);
    std::vector<TrialStatistics> stats;
    stats.reserve(records.size());
    for (const auto& r : records) stats.push_back(r.statistics);
    return calibrate_from_cache(std::move(stats), config.target_far);
}

double wilson_half_width(int successes, int trials, double z) {
    if (trials <= 0) return 0.0;
    const double n = trials;
    const double p = successes / n;
    const double z2 = z * z;
    return z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
}

RmseSummary velocity_rmse(std::span<const TrialRecord> records, double carrier_hz) {
    std::vector<double> errors;
    for (const auto& r : records) {
        if (r.decision.hypothesis != Hypothesis::H2 || !r.true_doppler_t || !r.true_doppler_r) continue;
        const double et = doppler_to_velocity(*r.decision.doppler_t - *r.true_doppler_t, carrier_hz);
        const double er = doppler_to_velocity(*r.decision.doppler_r - *r.true_doppler_r, carrier_hz);
        errors.push_back(0.5 * (et * et + er * er));
    }
    RmseSummary out;
    out.used_trials = static_cast<int>(errors.size());
    if (errors.empty()) return out;
    const double n = static_cast<double>(errors.size());
    const double total = std::accumulate(errors.begin(), errors.end(), 0.0);
    out.rmse = std::sqrt(total / n);
    if (errors.size() >= 2) {
        std::vector<double> loo(errors.size());
        for (std::size_t i = 0; i < errors.size(); ++i) {
            loo[i] = std::sqrt(std::max(0.0, total - errors[i]) / (n - 1));
        }
        const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : loo) ss += (v - mean) * (v - mean);
        out.half_width = 1.959963984540054 * std::sqrt((n - 1) / n * ss);
    }
    return out;
}

SweepResult run_sweep(const ExperimentConfig& base, std::span<const ScanningPolicy> cases,
                      int threads, std::span<const std::optional<Threshold>> cached,
                      const ProgressFn& progress) {
    base.validate();
    if (base.snr_db.empty()) throw ConfigError("snr_db: sweep needs at least one SNR value");
    if (!cached.empty() && cached.size() != cases.size()) {
        throw ConfigError("cached thresholds must match the sweep cases one-to-one");
    }
    SweepResult result;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        ExperimentConfig config = base;
        config.policy = cases[c];
        config.validate();
        const std::string label =
            std::string(to_string(config.policy.kind)) + " P=" + std::to_string(config.policy.pulses);

        double eta;
        double far;
        if (!cached.empty() && cached[c]) {
            eta = cached[c]->eta;
            far = cached[c]->achieved_far;
        } else {
            if (progress) progress("calibrating " + label);
            const Calibration cal = calibrate_threshold(config, config.h0_trials, threads);
            eta = cal.eta;
            far = cal.achieved_far;
        }
        for (double snr : config.snr_db) {
            if (progress) progress(label + " SNR " + std::to_string(snr) + " dB");
            const auto records = run_trials(config, Scenario::H2, snr, eta,
                                            stream_id(Stream::sweep, config.policy.pulses),
                                            config.trials, threads);
            int detected = 0;
            for (const auto& r : records) detected += r.decision.hypothesis == Hypothesis::H2;
            const RmseSummary rmse = velocity_rmse(records, config.carrier_hz);
            result.points.push_back(SweepPoint{config.policy.kind, config.policy.pulses, snr,
                                               static_cast<double>(detected) / config.trials,
                                               wilson_half_width(detected, config.trials), rmse.rmse,
                                               rmse.half_width, far, eta, config.trials});
        }
    }
    return result;
}

}  // namespace starris
