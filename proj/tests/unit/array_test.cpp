#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <starris/array.hpp>
#include <starris/errors.hpp>

#include "oracle.hpp"

using namespace starris;

namespace {

const double wl = speed_of_light / 28e9;

Direction random_direction(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> az(-pi / 2 + 0.01, 3 * pi / 2 - 0.01);
    std::uniform_real_distribution<double> el(-pi / 2 + 0.01, pi / 2 - 0.01);
    for (;;) {
        const double a = az(rng);
        if (std::abs(a - pi / 2) < 0.01) continue;
        return Direction::from_radians(a, el(rng));
    }
}

}  // namespace

TEST(Direction, HalfSpaceFollowsAzimuth) {
    EXPECT_EQ(Direction::from_degrees(22, 22).half_space(), HalfSpace::reflective);
    EXPECT_EQ(Direction::from_degrees(-30, 0).half_space(), HalfSpace::reflective);
    EXPECT_EQ(Direction::from_degrees(158, 22).half_space(), HalfSpace::transmissive);
    EXPECT_EQ(Direction::from_degrees(210, -30).half_space(), HalfSpace::transmissive);
}

TEST(Direction, AzimuthWrapsIntoPrincipalRange) {
    const auto d = Direction::from_degrees(-150, 10);
    EXPECT_NEAR(rad_to_deg(d.azimuth()), 210.0, 1e-12);
    EXPECT_EQ(d.half_space(), HalfSpace::transmissive);
    const auto e = Direction::from_degrees(380, 10);
    EXPECT_NEAR(rad_to_deg(e.azimuth()), 20.0, 1e-12);
}

TEST(Direction, RejectsGrazingAndPolarDirections) {
    EXPECT_THROW(Direction::from_degrees(90, 0), ConfigError);
    EXPECT_THROW(Direction::from_degrees(270, 10), ConfigError);
    EXPECT_THROW(Direction::from_degrees(-90, 10), ConfigError);
    EXPECT_THROW(Direction::from_degrees(10, 90), ConfigError);
    EXPECT_THROW(Direction::from_degrees(10, -95), ConfigError);
    EXPECT_THROW(Direction::from_radians(std::nan(""), 0), ConfigError);
}

TEST(Direction, MirrorSwapsHalfSpace) {
    const auto d = Direction::from_degrees(22, 22);
    const auto m = d.mirrored();
    EXPECT_NEAR(rad_to_deg(m.azimuth()), 158.0, 1e-12);
    EXPECT_NEAR(rad_to_deg(m.elevation()), 22.0, 1e-12);
    EXPECT_EQ(m.half_space(), HalfSpace::transmissive);
    const auto mm = m.mirrored();
    EXPECT_NEAR(mm.azimuth(), d.azimuth(), 1e-12);
}

TEST(Direction, UnitVectorIsNormalised) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        EXPECT_NEAR(random_direction(rng).unit_vector().norm(), 1.0, 1e-14);
    }
}

TEST(UraPositions, CentredGridInYZPlane) {
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    ASSERT_EQ(geom.size(), 128);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : geom.positions()) {
        EXPECT_EQ(p.x(), 0.0);
        sum += p;
    }
    EXPECT_LT(sum.norm(), 1e-15);
    // z runs fastest
    EXPECT_NEAR(geom.positions()[1].z() - geom.positions()[0].z(), wl / 2, 1e-15);
    EXPECT_NEAR(geom.positions()[8].y() - geom.positions()[0].y(), wl / 2, 1e-15);
}

TEST(UraPositions, RejectsInvalidShapes) {
    EXPECT_THROW(ura_positions(0, 8, 1, 1), ConfigError);
    EXPECT_THROW(ura_positions(4, -1, 1, 1), ConfigError);
    EXPECT_THROW(ura_positions(4, 4, 0, 1), ConfigError);
    EXPECT_THROW(ura_positions(4, 4, 1, -1), ConfigError);
}

TEST(SteeringVector, BroadsideIsAllOnes) {
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    const auto u = steering_vector(geom, Direction::from_degrees(0, 0), wl);
    EXPECT_LT((u.entries - cvec::Ones(128)).norm(), 1e-12);
}

TEST(SteeringVector, MatchesDirectEvaluation) {
    std::mt19937_64 rng(5);
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    for (int i = 0; i < 100; ++i) {
        const auto d = random_direction(rng);
        const auto u = steering_vector(geom, d, wl);
        const auto ref = oracle::steering(geom, d.azimuth(), d.elevation(), wl);
        EXPECT_LT((u.entries - ref).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(SteeringVector, UnitModulusEntries) {
    std::mt19937_64 rng(7);
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    for (int i = 0; i < 100; ++i) {
        const auto u = steering_vector(geom, random_direction(rng), wl);
        EXPECT_LT((u.entries.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
    }
}

TEST(SteeringVector, MirrorAmbiguity) {
    std::mt19937_64 rng(11);
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_direction(rng);
        const auto u = steering_vector(geom, d, wl).entries;
        const auto v = steering_vector(geom, d.mirrored(), wl).entries;
        EXPECT_LT((u - v).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(SteeringVector, CentroidOriginGivesConjugateSymmetry) {
    std::mt19937_64 rng(13);
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    const Eigen::Index n = geom.size();
    for (int i = 0; i < 50; ++i) {
        const auto u = steering_vector(geom, random_direction(rng), wl).entries;
        for (Eigen::Index k = 0; k < n; ++k) {
            EXPECT_LT(std::abs(u[k] - std::conj(u[n - 1 - k])), 1e-12);
        }
    }
}

TEST(UraPositions, SingleElementAtOrigin) {
    const auto geom = ura_positions(1, 1, wl / 2, wl / 2);
    ASSERT_EQ(geom.size(), 1);
    EXPECT_EQ(geom.positions()[0].norm(), 0.0);
}

TEST(UraPositions, SymmetricPairAlongY) {
    const auto geom = ura_positions(2, 1, wl / 2, wl / 2);
    ASSERT_EQ(geom.size(), 2);
    EXPECT_NEAR(geom.positions()[0].y(), -wl / 4, 1e-15);
    EXPECT_NEAR(geom.positions()[1].y(), wl / 4, 1e-15);
    EXPECT_EQ(geom.positions()[0].z(), 0.0);
}

TEST(UraPositions, ExtentsOfSixteenByEight) {
    const auto geom = ura_positions(16, 8, wl / 2, wl / 2);
    double ymin = 0, ymax = 0, zmin = 0, zmax = 0;
    for (const auto& p : geom.positions()) {
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
        zmin = std::min(zmin, p.z());
        zmax = std::max(zmax, p.z());
    }
    EXPECT_NEAR(ymax - ymin, 7.5 * wl, 1e-12);
    EXPECT_NEAR(zmax - zmin, 3.5 * wl, 1e-12);
}

TEST(SteeringVector, TwoElementHandPhases) {
    // positions -+lambda/4 along y; k_y = sin(30 deg) -> phases -+pi/4
    const auto geom = ura_positions(2, 1, wl / 2, wl / 2);
    const auto u = steering_vector(geom, Direction::from_degrees(30, 0), wl).entries;
    EXPECT_LT(std::abs(u[0] - std::polar(1.0, -pi / 4)), 1e-12);
    EXPECT_LT(std::abs(u[1] - std::polar(1.0, pi / 4)), 1e-12);
}
