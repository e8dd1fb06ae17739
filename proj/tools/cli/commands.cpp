#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <json.hpp>

#include <starris/errors.hpp>
#include <starris/parallel.hpp>

#include "output.hpp"

namespace starris::cli {

using nlohmann::json;

namespace {

std::vector<double> axis(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

ScanningPolicy single_case(const RunConfig& config, const char* command) {
    const auto cases = config.cases();
    if (cases.size() != 1) {
        throw ConfigError(std::string(command) +
                          ": needs exactly one policy and one pulse count (use --policy and --pulses)");
    }
    return cases.front();
}

std::map<std::uint64_t, Threshold> read_cache(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("calibration: cannot open " + path.string());
    std::map<std::uint64_t, Threshold> out;
    try {
        const json doc = json::parse(in);
        for (const auto& e : doc.at("entries")) {
            const auto key = std::stoull(e.at("calibration_hash").get<std::string>(), nullptr, 16);
            out[key] = Threshold{e.at("eta").get<double>(), e.at("achieved_far").get<double>()};
        }
    } catch (const json::exception& e) {
        throw ConfigError("calibration: malformed cache " + path.string() + " (" + e.what() + ")");
    }
    return out;
}

std::optional<Threshold> cached_threshold(const std::map<std::uint64_t, Threshold>& cache,
                                          const RunConfig& config, const ScanningPolicy& policy) {
    const auto it = cache.find(calibration_hash(config, policy));
    if (it == cache.end()) return std::nullopt;
    return it->second;
}

std::string optional_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

}  // namespace

std::string format_number(double value) {
    return fmt::format("{}", value);
}

std::string csv_preamble(const RunConfig& config) {
    return "# config_hash=" + hex(config_hash(config)) + " seed=" + std::to_string(config.seed) + "\n";
}

void write_beampattern(const RunConfig& config, const std::filesystem::path& out) {
    const auto policy = config.cases().front();
    const ExperimentConfig exp = config.experiment(policy);
    const double wl = speed_of_light / exp.carrier_hz;
    const auto ris = ura_positions(exp.ris.n_y, exp.ris.n_z, exp.ris.spacing_y_wl * wl, exp.ris.spacing_z_wl * wl);
    auto rng = counter_rng(config.seed, stream_id(Stream::beampattern, 0), 0);
    const auto g = random_feeder_channel(ris.size(), rng);
    const auto& b = config.beampattern;
    const auto bar = synthesize_profiles(g, Direction::from_degrees(b.steer_t_az, b.steer_t_el),
                                         Direction::from_degrees(b.steer_r_az, b.steer_r_el), ris, wl);
    const auto profile = stack_profile(bar.transmissive, bar.reflective, make_codes(policy));
    const HalfSpace half = b.half_space == "transmissive" ? HalfSpace::transmissive : HalfSpace::reflective;

    const auto az_deg = axis(b.az_min, b.az_max, b.az_step);
    const auto el_deg = axis(b.el_min, b.el_max, b.el_step);
    std::vector<double> az, el;
    for (double a : az_deg) az.push_back(deg_to_rad(a));
    for (double e : el_deg) el.push_back(deg_to_rad(e));
    const auto grid = beampattern_grid(profile, half, az, el, g, ris, wl);

    OutputFile file(out);
    auto& os = file.stream();
    os << csv_preamble(config) << "az_deg,el_deg,normalized_gf\n";
    for (std::size_t i = 0; i < az.size(); ++i) {
        for (std::size_t j = 0; j < el.size(); ++j) {
            os << format_number(az_deg[i]) << ',' << format_number(el_deg[j]) << ','
               << format_number(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
               << '\n';
        }
    }
    file.commit();
}

void calibrate(const RunConfig& config, const CalibrateOptions& options, std::ostream& log) {
    json entries = json::array();
    std::optional<OutputFile> stats_file;
    if (options.stats_out) {
        stats_file.emplace(*options.stats_out);
        stats_file->stream() << csv_preamble(config) << "policy,P,trial,max_t,max_r,max_pair\n";
    }
    for (const auto& policy : config.cases()) {
        const ExperimentConfig exp = config.experiment(policy);
        const Calibration cal = calibrate_threshold(exp, exp.h0_trials, config.threads);
        log << to_string(policy.kind) << " P=" << policy.pulses << " eta=" << format_number(cal.eta)
            << " achieved_far=" << format_number(cal.achieved_far)
            << " target_far=" << format_number(cal.target_far) << " h0_trials=" << cal.trials
            << " doppler_resolution_hz=" << format_number(doppler_resolution(policy.kind, policy.pulses, exp.pri_s))
            << '\n';
        entries.push_back({{"policy", to_string(policy.kind)},
                           {"pulses", policy.pulses},
                           {"calibration_hash", hex(calibration_hash(config, policy))},
                           {"eta", cal.eta},
                           {"achieved_far", cal.achieved_far},
                           {"target_far", cal.target_far},
                           {"h0_trials", cal.trials}});
        if (stats_file) {
            auto& os = stats_file->stream();
            for (std::size_t i = 0; i < cal.h0_statistics.size(); ++i) {
                const auto& s = cal.h0_statistics[i];
                os << to_string(policy.kind) << ',' << policy.pulses << ',' << i << ','
                   << format_number(s.max_t) << ',' << format_number(s.max_r) << ','
                   << format_number(s.max_pair) << '\n';
            }
        }
    }
    OutputFile file(options.out);
    file.stream() << json{{"config_hash", hex(config_hash(config))},
                          {"seed", config.seed},
                          {"entries", entries}}
                         .dump(2)
                  << '\n';
    if (stats_file) stats_file->commit();
    file.commit();
}

void detect(const RunConfig& config, const DetectOptions& options, std::ostream& out) {
    const auto policy = single_case(config, "detect");
    const ExperimentConfig exp = config.experiment(policy);
    double eta;
    std::string eta_source;
    if (options.eta) {
        eta = *options.eta;
        eta_source = "flag";
    } else if (options.calibration) {
        const auto t = cached_threshold(read_cache(*options.calibration), config, policy);
        if (!t) {
            throw ConfigError("calibration: cache has no entry for this policy, P and calibration settings "
                              "(seed, h0_trials, target_far and scene keys must match)");
        }
        eta = t->eta;
        eta_source = "cache";
    } else {
        eta = calibrate_threshold(exp, exp.h0_trials, config.threads).eta;
        eta_source = "calibrated";
    }
    auto rng = counter_rng(config.seed, stream_id(Stream::detect, policy.pulses), options.trial);
    const TrialRecord r = run_trial(exp, options.scenario, options.snr_db, eta, rng);
    const auto grid = make_grid(exp);
    const Decision& d = r.decision;
    const auto& s = r.statistics;

    out << "policy: " << to_string(policy.kind) << '\n'
        << "pulses: " << policy.pulses << '\n'
        << "seed: " << config.seed << '\n'
        << "trial: " << options.trial << '\n'
        << "snr_db: " << format_number(options.snr_db) << '\n'
        << "eta: " << format_number(eta) << " (" << eta_source << ")\n"
        << "doppler_resolution_hz: " << format_number(doppler_resolution(policy.kind, policy.pulses, exp.pri_s)) << '\n'
        << "max_doppler_hz: " << format_number(0.5 / exp.pri_s) << '\n'
        << "max_velocity_mps: " << format_number(doppler_to_velocity(0.5 / exp.pri_s, exp.carrier_hz)) << '\n'
        << "grid: " << grid.size() << " points, step " << format_number(grid.step()) << " Hz, ["
        << format_number(grid.values().front()) << ", " << format_number(grid.values().back()) << "] Hz\n"
        << "truth: " << to_string(r.truth) << '\n'
        << "decision: " << to_string(d.hypothesis) << '\n';
    auto cell = [&](const char* name, const std::optional<double>& truth, const std::optional<double>& nu,
                    const std::optional<double>& v) {
        out << name << ": true_doppler_hz=" << (truth ? format_number(*truth) : "-")
            << " doppler_hz=" << (nu ? format_number(*nu) : "-")
            << " velocity_mps=" << (v ? format_number(*v) : "-") << '\n';
    };
    cell("cell_t", r.true_doppler_t, d.doppler_t, d.velocity_t);
    cell("cell_r", r.true_doppler_r, d.doppler_r, d.velocity_r);
    out << "objective: H0=" << format_number(d.objective[0]) << " H1t=" << format_number(d.objective[1])
        << " H1r=" << format_number(d.objective[2]) << " H2=" << format_number(d.objective[3]) << '\n'
        << "statistics: max_t=" << format_number(s.max_t) << " max_r=" << format_number(s.max_r)
        << " max_pair=" << format_number(s.max_pair) << '\n'
        << "degenerate_pair: " << (d.degenerate_pair ? "true" : "false") << '\n'
        << "received_target_energy: " << format_number(r.received_target_energy) << '\n';
}

void sweep(const RunConfig& config, const SweepOptions& options, std::ostream& log) {
    const auto cases = config.cases();
    const ExperimentConfig base = config.experiment(cases.front());
    std::vector<std::optional<Threshold>> cached(cases.size());
    if (options.calibration) {
        const auto cache = read_cache(*options.calibration);
        for (std::size_t i = 0; i < cases.size(); ++i) cached[i] = cached_threshold(cache, config, cases[i]);
    }
    ProgressFn progress;
    if (options.progress) progress = [&log](const std::string& msg) { log << msg << '\n' << std::flush; };
    const SweepResult result = run_sweep(base, cases, config.threads, cached, progress);

    OutputFile csv(options.out);
    auto& os = csv.stream();
    os << csv_preamble(config) << "policy,P,snr_db,pd,pd_ci,rmse_mps,rmse_ci,far_achieved,trials\n";
    json thresholds = json::array();
    for (const auto& p : result.points) {
        os << to_string(p.policy) << ',' << p.pulses << ',' << format_number(p.snr_db) << ','
           << format_number(p.pd) << ',' << format_number(p.pd_ci) << ',' << optional_number(p.rmse_mps) << ','
           << optional_number(p.rmse_ci) << ',' << format_number(p.far_achieved) << ',' << p.trials << '\n';
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
        for (const auto& p : result.points) {
            if (p.policy == cases[i].kind && p.pulses == cases[i].pulses) {
                thresholds.push_back({{"policy", to_string(p.policy)},
                                      {"pulses", p.pulses},
                                      {"eta", p.eta},
                                      {"far_achieved", p.far_achieved},
                                      {"from_cache", cached[i].has_value()}});
                break;
            }
        }
    }
    OutputFile manifest(options.out.string() + ".manifest.json");
    json config_doc = to_json(config);
    config_doc.erase("threads");
    manifest.stream() << json{{"config_hash", hex(config_hash(config))},
                              {"seed", config.seed},
                              {"csv", options.out.filename().string()},
                              {"thresholds", thresholds},
                              {"config", config_doc}}
                             .dump(2)
                      << '\n';
    csv.commit();
    manifest.commit();
}

}  // namespace starris::cli
