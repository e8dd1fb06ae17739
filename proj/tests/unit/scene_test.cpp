#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <starris/disturbance.hpp>
#include <starris/errors.hpp>
#include <starris/scene.hpp>

#include "oracle.hpp"

using namespace starris;

namespace {

struct World {
    RadarSetup setup;
    Direction dir_t = Direction::from_degrees(157, 23);
    Direction dir_r = Direction::from_degrees(21, 24);
    StarRisProfile profile;

    World(Policy kind, int pulses, std::mt19937_64& rng, int ris_y = 16, int ris_z = 8, int rx_y = 16,
          int rx_z = 8)
        : setup(oracle::small_setup(ris_y, ris_z, rx_y, rx_z, rng)),
          profile(make_profile(kind, pulses)) {}

    StarRisProfile make_profile(Policy kind, int pulses) const {
        const auto bar = synthesize_profiles(setup.feeder, dir_t, dir_r, setup.ris, setup.wavelength());
        return stack_profile(bar.transmissive, bar.reflective, make_codes({kind, pulses}));
    }
};

Direction random_direction(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> az(-80, 260);
    std::uniform_real_distribution<double> el(-80, 80);
    for (;;) {
        const double a = az(rng);
        if (std::abs(a - 90) < 1) continue;
        return Direction::from_degrees(a, el(rng));
    }
}

}  // namespace

TEST(DopplerVector, ZeroAndNyquist) {
    EXPECT_LT((doppler_vector(0, 0.5e-3, 8) - cvec::Ones(8)).norm(), 1e-15);
    cvec alt(4);
    alt << 1, -1, 1, -1;
    EXPECT_LT((doppler_vector(1000, 0.5e-3, 4) - alt).norm(), 1e-12);
}

TEST(DopplerVector, PeriodicInOneOverT) {
    for (double nu : {-730.0, 12.5, 999.0}) {
        EXPECT_LT((doppler_vector(nu, 0.5e-3, 16) - doppler_vector(nu + 2000, 0.5e-3, 16)).norm(), 1e-10);
    }
}

TEST(SpaceTimeSteering, GeneralAndFactoredFormsAgree) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> nu(-999, 999);
    for (int i = 0; i < 100; ++i) {
        const Policy kind = i % 2 ? Policy::sequential : Policy::simultaneous;
        World w(kind, 2 * (1 + i % 8), rng, 8, 4, 6, 4);
        const auto d = random_direction(rng);
        const double v = nu(rng);
        const HalfSpace half = d.half_space();
        const cvec general = space_time_steering(w.setup, w.profile.stacked(half), d, v);
        const cvec factored = factored_space_time_steering(w.setup, w.profile.spatial(half),
                                                            w.profile.code(half), d, v);
        const cvec dense = oracle::space_time(w.setup, w.profile.stacked(half), d.azimuth(),
                                              d.elevation(), v);
        EXPECT_LT((general - factored).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((general - dense).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((space_time_factors(w.setup, w.profile, d, v).dense() - general).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(SpaceTimeSteering, SequentialTransmissiveVanishesInSecondHalf) {
    std::mt19937_64 rng(19);
    World w(Policy::sequential, 8, rng);
    const cvec h = space_time_steering(w.setup, w.profile, w.dir_t, 700);
    const Eigen::Index n = w.setup.rx.size();
    EXPECT_EQ(h.tail(4 * n).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(h.head(4 * n).cwiseAbs().minCoeff(), 0.0);
}

TEST(SpaceTimeSteering, NormFactorisesAtSteeredDirection) {
    std::mt19937_64 rng(23);
    for (Policy kind : {Policy::simultaneous, Policy::sequential}) {
        World w(kind, 16, rng);
        for (HalfSpace half : {HalfSpace::transmissive, HalfSpace::reflective}) {
            const Direction& d = half == HalfSpace::transmissive ? w.dir_t : w.dir_r;
            const double gf = array_gain_factor(w.profile.spatial(half), d, w.setup.feeder,
                                                w.setup.ris, w.setup.wavelength());
            const double expected = gf * 8 * 128;
            const cvec h = space_time_steering(w.setup, w.profile, d, 640);
            EXPECT_NEAR(h.squaredNorm(), expected, 1e-9 * expected);
        }
    }
}

TEST(SpaceTimeSteering, RejectsLengthMismatch) {
    std::mt19937_64 rng(29);
    World w(Policy::simultaneous, 4, rng);
    EXPECT_THROW(space_time_steering(w.setup, cvec::Ones(5), w.dir_r, 0), ConfigError);
}

TEST(CalibrateAmplitudeVariance, ZeroAndRoundTrip) {
    EXPECT_EQ(calibrate_amplitude_variance(0.0, 12.0, 1.0, 16), 0.0);
    std::mt19937_64 rng(31);
    const cvec h = oracle::random_cvec(64, rng);
    for (double snr : {0.01, 1.0, 100.0, 1e4}) {
        const double var = calibrate_amplitude_variance(snr, h, 2.0, 16);
        EXPECT_NEAR(var * h.squaredNorm() / (16 * 2.0), snr, 1e-12 * snr);
    }
    EXPECT_NEAR(db_to_linear(20.0), 100.0, 1e-12);
    EXPECT_THROW(calibrate_amplitude_variance(1.0, cvec::Zero(4), 1.0, 4), DegenerateCellError);
}

TEST(Scene, ValidateRejectsOutOfDomainScatterers) {
    Scene s;
    s.target_t = PointScatterer{Direction::from_degrees(20, 0), 500, 1.0, std::nullopt};
    EXPECT_THROW(s.validate(0.5e-3), ConfigError);
    s.target_t = PointScatterer{Direction::from_degrees(160, 0), 1500, 1.0, std::nullopt};
    EXPECT_THROW(s.validate(0.5e-3), ConfigError);
    s.target_t = PointScatterer{Direction::from_degrees(160, 0), 500, -1.0, std::nullopt};
    EXPECT_THROW(s.validate(0.5e-3), ConfigError);
    s.target_t = PointScatterer{Direction::from_degrees(160, 0), 500, 1.0, std::nullopt};
    EXPECT_NO_THROW(s.validate(0.5e-3));
    s.noise_variance = 0;
    EXPECT_THROW(s.validate(0.5e-3), ConfigError);
}

TEST(SynthesizeObservation, DeterministicTargetOnly) {
    std::mt19937_64 rng(37);
    World w(Policy::simultaneous, 8, rng);
    Scene s;
    s.target_t = PointScatterer{w.dir_t, 640, 1.0, complex(1.0, 0.0)};
    const cvec y = synthesize_observation(w.setup, s, w.profile, rng, {.add_noise = false});
    EXPECT_LT((y - space_time_steering(w.setup, w.profile, w.dir_t, 640)).norm(), 1e-12);
}

TEST(SynthesizeObservation, NoiseOnlySampleCovariance) {
    std::mt19937_64 rng(41);
    // Relative Frobenius error of a sample covariance is about sqrt(dim / draws).
    World w(Policy::simultaneous, 2, rng, 4, 4, 2, 2);
    Scene s;
    s.noise_variance = 2.5;
    const Eigen::Index dim = 2 * 4;
    cmat acc = cmat::Zero(dim, dim);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const cvec y = synthesize_observation(w.setup, s, w.profile, rng);
        acc += y * y.adjoint();
    }
    acc /= draws;
    const cmat ref = 2.5 * cmat::Identity(dim, dim);
    EXPECT_LT((acc - ref).norm() / ref.norm(), 0.05);
}

TEST(SynthesizeObservation, ClutterSampleCovarianceMatchesModel) {
    std::mt19937_64 rng(43);
    World w(Policy::simultaneous, 4, rng, 8, 4, 4, 2);
    Scene s;
    std::uniform_real_distribution<double> nu(-125, 125);
    for (int k = 0; k < 10; ++k) {
        s.clutter_t.push_back({Direction::from_degrees(200 + 2 * k, -30), nu(rng), 0.0, std::nullopt});
        s.clutter_r.push_back({Direction::from_degrees(-40 + 2 * k, -25), nu(rng), 0.0, std::nullopt});
    }
    for (auto* group : {&s.clutter_t, &s.clutter_r}) {
        for (auto& c : *group) {
            const cvec h = space_time_steering(w.setup, w.profile, c.direction, c.doppler_hz);
            c.amplitude_variance = calibrate_amplitude_variance(100.0, h, 1.0, 4);
        }
    }
    const cmat model = build_covariance(w.setup, s, w.profile).dense();
    const Eigen::Index dim = model.rows();
    cmat acc = cmat::Zero(dim, dim);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const cvec y = synthesize_observation(w.setup, s, w.profile, rng);
        acc += y * y.adjoint();
    }
    acc /= draws;
    EXPECT_LT((acc - model).norm() / model.norm(), 0.05);
}

TEST(BuildCovariance, NoClutterIsScaledIdentity) {
    std::mt19937_64 rng(47);
    World w(Policy::sequential, 4, rng, 4, 4, 4, 2);
    Scene s;
    s.noise_variance = 3.0;
    const auto model = build_covariance(w.setup, s, w.profile);
    EXPECT_EQ(model.rank(), 0);
    const cvec v = oracle::random_cvec(32, rng);
    EXPECT_LT((model.solve(v) - v / 3.0).norm(), 1e-14);
    EXPECT_LT((model.dense() - 3.0 * cmat::Identity(32, 32)).norm(), 1e-14);
}
