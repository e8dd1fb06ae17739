#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include <starris/detector.hpp>
#include <starris/disturbance.hpp>
#include <starris/experiment.hpp>
#include <starris/parallel.hpp>

using namespace starris;

namespace {

ExperimentConfig make_config(Policy kind, int pulses) {
    ExperimentConfig config;
    config.policy = {kind, pulses};
    return config;
}

struct Fixture {
    ExperimentConfig config;
    std::mt19937_64 rng;
    Environment env;
    Scene scene;
    std::shared_ptr<const DisturbanceModel> model;
    DopplerGrid grid;
    cvec y;

    Fixture(Policy kind, int pulses)
        : config(make_config(kind, pulses)),
          rng(counter_rng(1, 0, 0)),
          env(draw_environment(config, rng)),
          scene(make_scene(config, env, Scenario::H2, 5.0)),
          model(std::make_shared<const DisturbanceModel>(build_covariance(env.setup, scene, env.profile))),
          grid(make_grid(config)),
          y(synthesize_observation(env.setup, scene, env.profile, rng)) {}
};

Policy policy_arg(const benchmark::State& state) {
    return state.range(0) ? Policy::sequential : Policy::simultaneous;
}

void BM_CovarianceBuild(benchmark::State& state) {
    const Fixture f(policy_arg(state), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_covariance(f.env.setup, f.scene, f.env.profile));
    }
}

void BM_WoodburySolve(benchmark::State& state) {
    const Fixture f(policy_arg(state), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(f.model->solve(f.y));
}

void BM_BankBuild(benchmark::State& state) {
    const Fixture f(policy_arg(state), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            DetectorBank::build(f.model, f.env.setup, f.env.profile, f.env.dir_t, f.env.dir_r, f.grid, 7.0));
    }
}

void BM_Decide(benchmark::State& state) {
    const Fixture f(policy_arg(state), static_cast<int>(state.range(1)));
    const auto bank = DetectorBank::build(f.model, f.env.setup, f.env.profile, f.env.dir_t, f.env.dir_r, f.grid, 7.0);
    for (auto _ : state) benchmark::DoNotOptimize(gic_decide(bank, f.y));
}

void BM_Trial(benchmark::State& state) {
    const ExperimentConfig config = make_config(policy_arg(state), static_cast<int>(state.range(1)));
    const auto stream = stream_id(Stream::sweep, config.policy.pulses);
    std::uint64_t index = 0;
    for (auto _ : state) {
        auto rng = counter_rng(config.seed, stream, index++);
        benchmark::DoNotOptimize(run_trial(config, Scenario::H2, 5.0, 7.0, rng));
    }
}

#define STARRIS_CASES ArgsProduct({{0, 1}, {8, 16}})->ArgNames({"sequential", "P"})

BENCHMARK(BM_CovarianceBuild)->STARRIS_CASES;
BENCHMARK(BM_WoodburySolve)->STARRIS_CASES;
BENCHMARK(BM_BankBuild)->STARRIS_CASES->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Decide)->STARRIS_CASES;
BENCHMARK(BM_Trial)->STARRIS_CASES->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
