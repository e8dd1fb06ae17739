#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include <starris/detector.hpp>
#include <starris/errors.hpp>

#include "oracle.hpp"

using namespace starris;

namespace {

constexpr double pri = 0.5e-3;

struct World {
    RadarSetup setup;
    Direction dir_t;
    Direction dir_r;
    StarRisProfile profile;
    Scene scene;
    std::shared_ptr<const DisturbanceModel> model;
    DopplerGrid grid;

    World(Policy kind, int pulses, std::uint64_t seed, int clutter = 6, int oversampling = 2,
          Direction t = Direction::from_degrees(157, 23), Direction r = Direction::from_degrees(21, 24))
        : setup(make_setup(seed)), dir_t(t), dir_r(r), profile(make_profile(kind, pulses)),
          grid(DopplerGrid::uniform(pri, pulses, oversampling)) {
        std::mt19937_64 rng(seed + 1000);
        std::uniform_real_distribution<double> nu(-125, 125);
        std::uniform_real_distribution<double> az(200, 220), el(-40, -20);
        for (int k = 0; k < clutter; ++k) {
            const auto dt = Direction::from_degrees(az(rng), el(rng));
            const auto dr = dt.mirrored();
            for (const auto& d : {dt, Direction::from_degrees(rad_to_deg(dr.azimuth()) - 5, rad_to_deg(dr.elevation()))}) {
                PointScatterer c{d, nu(rng), 0.0, std::nullopt};
                c.amplitude_variance = calibrate_amplitude_variance(
                    100.0, space_time_steering(setup, profile, d, c.doppler_hz), 1.0, pulses);
                (d.half_space() == HalfSpace::transmissive ? scene.clutter_t : scene.clutter_r).push_back(c);
            }
        }
        model = std::make_shared<const DisturbanceModel>(build_covariance(setup, scene, profile));
    }

    static RadarSetup make_setup(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return oracle::small_setup(4, 4, 4, 2, rng);
    }

    StarRisProfile make_profile(Policy kind, int pulses) const {
        const auto bar = synthesize_profiles(setup.feeder, dir_t, dir_r, setup.ris, setup.wavelength());
        return stack_profile(bar.transmissive, bar.reflective, make_codes({kind, pulses}));
    }

    DetectorBank bank(double eta) const {
        return DetectorBank::build(model, setup, profile, dir_t, dir_r, grid, eta);
    }

    cvec h(HalfSpace half, double nu) const {
        return space_time_steering(setup, profile.stacked(half), half == HalfSpace::transmissive ? dir_t : dir_r, nu);
    }

    oracle::DenseBank dense() const {
        std::vector<cvec> ht, hr;
        for (double v : grid.values()) {
            ht.push_back(oracle::space_time(setup, profile.stacked(HalfSpace::transmissive), dir_t.azimuth(), dir_t.elevation(), v));
            hr.push_back(oracle::space_time(setup, profile.stacked(HalfSpace::reflective), dir_r.azimuth(), dir_r.elevation(), v));
        }
        return oracle::DenseBank(model->dense(), ht, hr);
    }

    cvec observe(std::mt19937_64& rng, std::optional<double> nu_t, std::optional<double> nu_r, double var) const {
        Scene s = scene;
        if (nu_t) s.target_t = PointScatterer{dir_t, *nu_t, var, std::nullopt};
        if (nu_r) s.target_r = PointScatterer{dir_r, *nu_r, var, std::nullopt};
        return synthesize_observation(setup, s, profile, rng);
    }
};

}  // namespace

TEST(DopplerGrid, UniformIncludesZeroAndStaysInside) {
    const auto g = DopplerGrid::uniform(pri, 16, 8);
    EXPECT_EQ(g.size(), 8u * 16u - 1u);
    EXPECT_NEAR(g.step(), 1.0 / (8 * 16 * pri), 1e-12);
    EXPECT_EQ(g[g.size() / 2], 0.0);
    EXPECT_LT(g.values().back(), 1000.0);
    EXPECT_GT(g.values().front(), -1000.0);
}

TEST(DopplerGrid, IntervalAndRestriction) {
    const auto g = DopplerGrid::over_interval(500, 900, 100, pri);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_EQ(g.values().back(), 900.0);
    EXPECT_THROW(DopplerGrid::over_interval(500, 1000, 100, pri), ConfigError);
    EXPECT_THROW(DopplerGrid::over_interval(500, 400, 100, pri), ConfigError);
    EXPECT_THROW(DopplerGrid::over_interval(0, 400, 0, pri), ConfigError);
    const auto r = DopplerGrid::uniform(pri, 16, 8).restricted(500, 1000);
    EXPECT_EQ(r.size(), 32u);
    EXPECT_EQ(r[0], 500.0);
    EXPECT_THROW(DopplerGrid::uniform(pri, 4, 1).restricted(10, 20), ConfigError);
}

TEST(SelectHypothesis, PenalisedArgmaxWithTiesToFewerTargets) {
    EXPECT_EQ(select_hypothesis(1, 1, 2, 2), Hypothesis::H0);
    EXPECT_EQ(select_hypothesis(2, 1, 2, 2), Hypothesis::H0);
    EXPECT_EQ(select_hypothesis(3, 1, 3, 2), Hypothesis::H1t);
    EXPECT_EQ(select_hypothesis(1, 3, 3, 2), Hypothesis::H1r);
    EXPECT_EQ(select_hypothesis(3, 3, 5, 2), Hypothesis::H1t);
    EXPECT_EQ(select_hypothesis(3, 3, 6, 2), Hypothesis::H2);
    EXPECT_EQ(select_hypothesis(3, 3, 8, 2), Hypothesis::H2);
}

TEST(Velocity, MapsDopplerToRadialSpeed) {
    EXPECT_EQ(doppler_to_velocity(0, 28e9), 0.0);
    EXPECT_NEAR(doppler_to_velocity(1000, 28e9), 5.3534, 1e-3);
    EXPECT_NEAR(doppler_to_velocity(740, 28e9) * 2, doppler_to_velocity(1480, 28e9), 1e-12);
}

TEST(CellFilterBank, NoClutterNormIsEnergyOverNoise) {
    World w(Policy::simultaneous, 8, 1, 0);
    const auto bank = w.bank(5.0);
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
        const double e = w.h(HalfSpace::transmissive, w.grid[i]).squaredNorm();
        EXPECT_NEAR(bank.cell(HalfSpace::transmissive).norm(i), e, 1e-10 * e);
    }
}

TEST(CellFilterBank, NormsAndCrossTermsMatchDenseSolves) {
    World w(Policy::simultaneous, 8, 2);
    const auto bank = w.bank(5.0);
    const Eigen::LDLT<cmat> ldlt(w.model->dense());
    for (std::size_t i = 0; i < w.grid.size(); i += 3) {
        const cvec ht = w.h(HalfSpace::transmissive, w.grid[i]);
        const double n = ht.dot(ldlt.solve(ht)).real();
        EXPECT_NEAR(bank.cell(HalfSpace::transmissive).norm(i), n, 1e-9 * n);
        for (std::size_t j = 0; j < w.grid.size(); j += 4) {
            const cvec hr = w.h(HalfSpace::reflective, w.grid[j]);
            const complex rho = ht.dot(ldlt.solve(hr));
            EXPECT_LT(std::abs(bank.cross(i, j) - rho), 1e-9 * std::sqrt(n * hr.dot(ldlt.solve(hr)).real()));
        }
    }
}

TEST(DetectorBank, SequentialCrossTermsVanish) {
    World w(Policy::sequential, 8, 3);
    const auto bank = w.bank(5.0);
    double worst = 0;
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
        for (std::size_t j = 0; j < w.grid.size(); ++j) {
            const double scale = std::sqrt(bank.cell(HalfSpace::transmissive).norm(i) *
                                           bank.cell(HalfSpace::reflective).norm(j));
            worst = std::max(worst, std::abs(bank.cross(i, j)) / scale);
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(DetectorBank, StatisticsOfZeroAndOfSteeringVector) {
    World w(Policy::simultaneous, 8, 4);
    const auto bank = w.bank(5.0);
    const cvec zero = cvec::Zero(w.model->dimension());
    EXPECT_EQ(single_statistic(bank, HalfSpace::transmissive, 3, zero), 0.0);
    EXPECT_EQ(pair_statistic(bank, 3, 4, zero).value, 0.0);
    EXPECT_EQ(gic_decide(bank, zero).hypothesis, Hypothesis::H0);
    const std::size_t i = 5;
    const cvec ht = w.h(HalfSpace::transmissive, w.grid[i]);
    const double n = bank.cell(HalfSpace::transmissive).norm(i);
    EXPECT_NEAR(single_statistic(bank, HalfSpace::transmissive, i, ht), n, 1e-9 * n);
    EXPECT_NEAR(w.model->quadratic_form(ht), n, 1e-9 * n);
}

TEST(DetectorBank, StatisticsMatchDenseOracle) {
    World w(Policy::simultaneous, 8, 5);
    const auto bank = w.bank(5.0);
    const auto dense = w.dense();
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const cvec y = w.observe(rng, 250.0, -375.0, trial % 2 ? 0.5 : 0.05);
        const cvec wy = dense.whiten(y);
        for (std::size_t i = 0; i < w.grid.size(); i += 2) {
            const double tt = dense.single(dense.white_t, i, wy);
            EXPECT_NEAR(single_statistic(bank, HalfSpace::transmissive, i, y), tt, 1e-8 * (1 + tt));
            const double tr = dense.single(dense.white_r, i, wy);
            EXPECT_NEAR(single_statistic(bank, HalfSpace::reflective, i, y), tr, 1e-8 * (1 + tr));
            for (std::size_t j = 0; j < w.grid.size(); j += 3) {
                const double p = dense.pair(i, j, wy);
                const auto v = pair_statistic(bank, i, j, y);
                EXPECT_FALSE(v.degenerate);
                EXPECT_NEAR(v.value, p, 1e-8 * (1 + p));
                EXPECT_GE(v.value, std::max(single_statistic(bank, HalfSpace::transmissive, i, y),
                                            single_statistic(bank, HalfSpace::reflective, j, y)) - 1e-9);
            }
        }
    }
}

TEST(DetectorBank, DecisionsMatchDenseOracle) {
    World w(Policy::simultaneous, 8, 6);
    const auto dense = w.dense();
    std::mt19937_64 rng(66);
    int h2 = 0;
    for (double eta : {3.0, 6.0, 12.0}) {
        const auto bank = w.bank(eta);
        for (int trial = 0; trial < 30; ++trial) {
            std::optional<double> nt, nr;
            if (trial % 4 == 1 || trial % 4 == 3) nt = 125.0 * (trial % 7) - 250;
            if (trial % 4 >= 2) nr = 500.0 - 125.0 * (trial % 5);
            const cvec y = w.observe(rng, nt, nr, 0.3);
            const auto d = gic_decide(bank, y);
            const auto ref = oracle::gic(dense, y, eta);
            ASSERT_EQ(d.hypothesis, ref.hypothesis);
            if (d.hypothesis == Hypothesis::H1t || d.hypothesis == Hypothesis::H2) {
                EXPECT_EQ(*d.doppler_t, w.grid[ref.index_t]);
            }
            if (d.hypothesis == Hypothesis::H1r || d.hypothesis == Hypothesis::H2) {
                EXPECT_EQ(*d.doppler_r, w.grid[ref.index_r]);
            }
            h2 += d.hypothesis == Hypothesis::H2;
        }
    }
    EXPECT_GT(h2, 5);
}

TEST(DetectorBank, StrongSingleTargetGivesH1AtTrueDoppler) {
    World w(Policy::simultaneous, 8, 7, 0);
    const auto bank = w.bank(8.0);
    const std::size_t i = 10;
    const cvec y = complex(30.0, -12.0) * w.h(HalfSpace::transmissive, w.grid[i]);
    const auto d = gic_decide(bank, y);
    EXPECT_EQ(d.hypothesis, Hypothesis::H1t);
    EXPECT_EQ(*d.doppler_t, w.grid[i]);
    EXPECT_NEAR(*d.velocity_t, doppler_to_velocity(w.grid[i], w.setup.carrier_hz), 1e-12);
    EXPECT_FALSE(d.doppler_r.has_value());
}

TEST(DetectorBank, TwoStrongTargetsGiveH2) {
    World w(Policy::simultaneous, 8, 8);
    const auto bank = w.bank(8.0);
    const std::size_t i = 9, j = 3;
    const cvec y = complex(20.0, 5.0) * w.h(HalfSpace::transmissive, w.grid[i]) +
                   complex(-7.0, 18.0) * w.h(HalfSpace::reflective, w.grid[j]);
    const auto d = gic_decide(bank, y);
    EXPECT_EQ(d.hypothesis, Hypothesis::H2);
    EXPECT_EQ(*d.doppler_t, w.grid[i]);
    EXPECT_EQ(*d.doppler_r, w.grid[j]);
}

TEST(DetectorBank, MirroredCellsProduceDegeneratePairs) {
    // Mirror-image cells with a real feeder share xbar, so h_t(nu) is
    // proportional to h_r(nu + 1/(2T)) under simultaneous scanning.
    World w(Policy::simultaneous, 4, 9, 0, 2, Direction::from_degrees(158, 22),
            Direction::from_degrees(22, 22));
    w.setup = RadarSetup{w.setup.ris, w.setup.rx, w.setup.carrier_hz, w.setup.pri_s,
                         FeederChannel(cvec::Ones(w.setup.ris.size()))};
    w.profile = w.make_profile(Policy::simultaneous, 4);
    const auto bank = w.bank(5.0);
    std::size_t i = 0;
    std::size_t j = 0;
    for (; j < w.grid.size(); ++j) {
        if (std::abs(w.grid[j] - (w.grid[i] + 1000.0)) < 1e-9) break;
    }
    ASSERT_LT(j, w.grid.size());
    EXPECT_TRUE(bank.pair_degenerate(i, j));
    std::mt19937_64 rng(99);
    const cvec y = oracle::random_cvec(w.model->dimension(), rng);
    const auto v = pair_statistic(bank, i, j, y);
    EXPECT_TRUE(v.degenerate);
    EXPECT_NEAR(v.value, std::max(single_statistic(bank, HalfSpace::transmissive, i, y),
                                  single_statistic(bank, HalfSpace::reflective, j, y)), 1e-9);
}

TEST(DetectorBank, WhitenedStatisticHasUnitMean) {
    World w(Policy::simultaneous, 8, 10);
    const auto bank = w.bank(5.0);
    std::mt19937_64 rng(100);
    std::vector<double> samples;
    for (int trial = 0; trial < 10000; ++trial) {
        const cvec y = w.observe(rng, std::nullopt, std::nullopt, 0.0);
        samples.push_back(single_statistic(bank, HalfSpace::reflective, 4, y));
    }
    double mean = 0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    EXPECT_NEAR(mean, 1.0, 0.05);
    EXPECT_LT(oracle::ks_exponential(samples), 0.02);
}

TEST(DetectorBank, SequentialPairIsSumOfSingles) {
    World w(Policy::sequential, 8, 11);
    const auto bank = w.bank(5.0);
    std::mt19937_64 rng(111);
    for (int trial = 0; trial < 20; ++trial) {
        const cvec y = w.observe(rng, 250.0, 500.0, 0.2);
        for (std::size_t i = 0; i < w.grid.size(); i += 2) {
            for (std::size_t j = 0; j < w.grid.size(); j += 3) {
                const double sum = single_statistic(bank, HalfSpace::transmissive, i, y) +
                                   single_statistic(bank, HalfSpace::reflective, j, y);
                EXPECT_NEAR(pair_statistic(bank, i, j, y).value, sum, 1e-9 * (1 + sum));
            }
        }
    }
}

TEST(SequentialDetector, AgreesWithFullGic) {
    World w(Policy::sequential, 8, 12);
    std::mt19937_64 rng(121);
    for (double eta : {2.0, 5.0, 9.0}) {
        const auto bank = w.bank(eta);
        const auto seq = SequentialDetector::build(*w.model, w.setup, w.profile, w.dir_t, w.dir_r, w.grid, eta);
        for (int trial = 0; trial < 100; ++trial) {
            std::optional<double> nt, nr;
            if (trial % 2) nt = -250.0 + 125.0 * (trial % 6);
            if (trial % 3) nr = 625.0 - 125.0 * (trial % 9);
            const cvec y = w.observe(rng, nt, nr, 0.1);
            const auto a = gic_decide(bank, y);
            const auto b = sequential_decide(seq, y);
            ASSERT_EQ(a.hypothesis, b.hypothesis);
            EXPECT_EQ(a.doppler_t, b.doppler_t);
            EXPECT_EQ(a.doppler_r, b.doppler_r);
        }
    }
}

TEST(SequentialDetector, ZeroAndReflectiveOnly) {
    World w(Policy::sequential, 8, 13, 0);
    const auto seq = SequentialDetector::build(*w.model, w.setup, w.profile, w.dir_t, w.dir_r, w.grid, 6.0);
    EXPECT_EQ(sequential_decide(seq, cvec::Zero(w.model->dimension())).hypothesis, Hypothesis::H0);
    const cvec y = complex(0, 25.0) * w.h(HalfSpace::reflective, w.grid[2]);
    const auto d = sequential_decide(seq, y);
    EXPECT_EQ(d.hypothesis, Hypothesis::H1r);
    EXPECT_EQ(*d.doppler_r, w.grid[2]);
}

TEST(SequentialDetector, RejectsOverlappingCodes) {
    World w(Policy::simultaneous, 8, 14, 0);
    EXPECT_FALSE(is_time_division(w.profile.codes()));
    EXPECT_THROW(SequentialDetector::build(*w.model, w.setup, w.profile, w.dir_t, w.dir_r, w.grid, 1.0),
                 ConfigError);
}

TEST(DetectorBank, ScaleInvariance) {
    World w(Policy::simultaneous, 8, 15);
    const auto bank = w.bank(5.0);
    std::mt19937_64 rng(151);
    const cvec y = w.observe(rng, 250.0, -125.0, 0.3);
    const auto base = bank.statistics(y);
    // Scaling y and C by the same factor leaves every statistic unchanged.
    std::vector<double> vars = w.model->variances();
    for (auto& v : vars) v *= 9.0;
    const auto scaled_model = std::make_shared<const DisturbanceModel>(
        9.0 * w.model->noise_variance(), w.model->pulses(), w.model->rx_elements(), w.model->columns(), vars);
    const auto scaled = DetectorBank::build(scaled_model, w.setup, w.profile, w.dir_t, w.dir_r, w.grid, 5.0);
    const auto s = scaled.statistics(cvec(3.0 * y));
    EXPECT_NEAR(s.max_t, base.max_t, 1e-9 * base.max_t);
    EXPECT_NEAR(s.max_r, base.max_r, 1e-9 * base.max_r);
    EXPECT_NEAR(s.max_pair, base.max_pair, 1e-9 * base.max_pair);
    EXPECT_EQ(s.arg_t, base.arg_t);
    EXPECT_EQ(s.pair_r, base.pair_r);
}

TEST(DetectorBank, DeclaredTargetsShrinkWithEta) {
    World w(Policy::simultaneous, 8, 16);
    const auto bank = w.bank(0.0);
    std::mt19937_64 rng(161);
    std::vector<TrialStatistics> stats;
    for (int trial = 0; trial < 200; ++trial) {
        stats.push_back(bank.statistics(w.observe(rng, std::nullopt, 375.0, 0.05)));
    }
    int previous = 1 << 30;
    for (double eta = 0.0; eta < 30.0; eta += 0.5) {
        int declared = 0;
        for (const auto& s : stats) {
            declared += declared_targets(decide(s, w.grid, eta, w.setup.carrier_hz).hypothesis);
        }
        EXPECT_LE(declared, previous);
        previous = declared;
    }
}
