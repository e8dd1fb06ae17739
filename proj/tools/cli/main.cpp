#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <starris/errors.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

using namespace starris;
using namespace starris::cli;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> policy;
    std::vector<int> pulses;
    std::optional<int> trials;
    std::optional<int> h0_trials;
    std::optional<int> threads;
    std::vector<double> snr;
    bool strict_far = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Config file (JSON) or preset name: paper_fig3, desk");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--policy", f.policy, "Scanning policies (simultaneous, sequential)")->delimiter(',');
    cmd->add_option("--pulses", f.pulses, "Pulses per CPI")->delimiter(',');
    cmd->add_option("--trials", f.trials, "Trials per sweep point");
    cmd->add_option("--h0-trials", f.h0_trials, "H0 trials for threshold calibration");
    cmd->add_option("--threads", f.threads, "Worker threads");
    cmd->add_flag("--strict-far", f.strict_far,
                  "Calibrate to 1e-3 false alarms per CPI (forces >= 1e6 H0 trials; long run)");
}

RunConfig resolve(const CommonFlags& f, bool snr_list) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
    if (f.seed) c.seed = *f.seed;
    if (!f.policy.empty()) {
        c.policies.clear();
        for (const auto& p : f.policy) c.policies.push_back(policy_from_string(p));
    }
    if (!f.pulses.empty()) c.pulses = f.pulses;
    if (f.trials) c.trials = *f.trials;
    if (f.h0_trials) c.h0_trials = *f.h0_trials;
    if (f.threads) c.threads = *f.threads;
    if (snr_list && !f.snr.empty()) c.snr_db = f.snr;
    if (f.strict_far) {
        c.target_far = 1e-3;
        c.h0_trials = std::max(c.h0_trials, 1'000'000);
    }
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS pulse-Doppler radar simulator"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* beam = app.add_subcommand("beampattern", "Normalised array gain factor grid (CSV)");
    add_common(beam, flags);
    std::string beam_out = "beampattern.csv";
    beam->add_option("--out", beam_out, "Output CSV");

    auto* cal = app.add_subcommand("calibrate", "Calibrate the detection threshold per policy and P");
    add_common(cal, flags);
    CalibrateOptions cal_opts;
    std::string cal_out = "calibration.json";
    std::string stats_out;
    cal->add_option("--out", cal_out, "Threshold cache (JSON)");
    cal->add_option("--stats-out", stats_out, "Per-trial H0 statistic maxima (CSV)");

    auto* det = app.add_subcommand("detect", "Run one synthesized CPI and print the decision");
    add_common(det, flags);
    DetectOptions det_opts;
    std::string scenario = "H2";
    std::string det_cache;
    det->add_option("--scenario", scenario, "H0, H1t, H1r or H2");
    det->add_option("--snr", det_opts.snr_db, "Per-pulse SNR in dB");
    det->add_option("--eta", det_opts.eta, "Detection threshold (skips calibration)");
    det->add_option("--calibration", det_cache, "Threshold cache written by calibrate");
    det->add_option("--trial", det_opts.trial, "Trial index within the detect stream");

    auto* sw = app.add_subcommand("sweep", "PD and velocity RMSE versus SNR (CSV + manifest)");
    add_common(sw, flags);
    SweepOptions sw_opts;
    std::string sw_out = "sweep.csv";
    std::string sw_cache;
    sw->add_option("--out", sw_out, "Output CSV; the manifest goes to <out>.manifest.json");
    sw->add_option("--snr", flags.snr, "SNR points in dB")->delimiter(',');
    sw->add_option("--calibration", sw_cache, "Threshold cache written by calibrate");
    sw->add_flag("--progress", sw_opts.progress, "Report progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "starris: error: " << e.what() << '\n';
        return e.get_exit_code() ? e.get_exit_code() : 2;
    }

    try {
        if (beam->parsed()) {
            write_beampattern(resolve(flags, false), beam_out);
        } else if (cal->parsed()) {
            cal_opts.out = cal_out;
            if (!stats_out.empty()) cal_opts.stats_out = stats_out;
            calibrate(resolve(flags, false), cal_opts, std::cout);
        } else if (det->parsed()) {
            det_opts.scenario = scenario_from_string(scenario);
            if (!det_cache.empty()) det_opts.calibration = det_cache;
            detect(resolve(flags, false), det_opts, std::cout);
        } else if (sw->parsed()) {
            sw_opts.out = sw_out;
            if (!sw_cache.empty()) sw_opts.calibration = sw_cache;
            sweep(resolve(flags, true), sw_opts, std::cerr);
        }
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "starris: error: " << msg << '\n';
        return 1;
    }
    return 0;
}
