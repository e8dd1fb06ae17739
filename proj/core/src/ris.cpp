#include "starris/ris.hpp"

#include <algorithm>
#include <cmath>

#include "starris/errors.hpp"

namespace starris {

const char* to_string(Policy policy) {
    return policy == Policy::simultaneous ? "simultaneous" : "sequential";
}

Policy policy_from_string(const std::string& name) {
    if (name == "simultaneous") return Policy::simultaneous;
    if (name == "sequential") return Policy::sequential;
    throw ConfigError("unknown scanning policy '" + name + "' (expected simultaneous or sequential)");
}

SlowTimeCodes make_codes(const ScanningPolicy& policy) {
    const int P = policy.pulses;
    if (P < 2 || P % 2 != 0) {
        throw ConfigError("pulses per CPI must be even and >= 2, got " + std::to_string(P));
    }
    SlowTimeCodes codes{cvec(P), cvec(P)};
    switch (policy.kind) {
    case Policy::simultaneous: {
        const double a = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < P; ++i) {
            // pulse index p = i + 1
            codes.transmissive[i] = (i % 2 == 0) ? -a : a;
            codes.reflective[i] = a;
        }
        break;
    }
    case Policy::sequential:
        for (int i = 0; i < P; ++i) {
            const bool first_half = i < P / 2;
            codes.transmissive[i] = first_half ? 1.0 : 0.0;
            codes.reflective[i] = first_half ? 0.0 : 1.0;
        }
        break;
    }
    return codes;
}

FeederChannel::FeederChannel(cvec gains) : gains_(std::move(gains)) {
    if (gains_.size() == 0 || gains_.cwiseAbs2().sum() == 0.0) {
        throw ConfigError("feeder channel must be non-empty and not identically zero");
    }
}

FeederChannel random_feeder_channel(Eigen::Index atoms, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    cvec g(atoms);
    for (auto& v : g) {
        const double re = normal(rng);
        const double im = normal(rng);
        v = complex(re, im);
    }
    return FeederChannel(std::move(g));
}

namespace {

cvec cophasing_profile(const FeederChannel& g, const Direction& dir, const ArrayGeometry& ris,
                       double wavelength) {
    const cvec u = steering_vector(ris, dir, wavelength).entries;
    cvec xbar(u.size());
    for (Eigen::Index n = 0; n < u.size(); ++n) {
        xbar[n] = std::polar(1.0, -(std::arg(g.gains()[n]) + std::arg(u[n])));
    }
    return xbar;
}

}  // namespace

PhaseProfiles synthesize_profiles(const FeederChannel& g, const Direction& dir_t,
                                  const Direction& dir_r, const ArrayGeometry& ris,
                                  double wavelength) {
    if (dir_t.half_space() != HalfSpace::transmissive) {
        throw ConfigError("transmissive steering direction must have azimuth in (90, 270) degrees");
    }
    if (dir_r.half_space() != HalfSpace::reflective) {
        throw ConfigError("reflective steering direction must have azimuth in (-90, 90) degrees");
    }
    if (g.size() != ris.size()) {
        throw ConfigError("feeder channel length does not match the surface size");
    }
    return {cophasing_profile(g, dir_t, ris, wavelength), cophasing_profile(g, dir_r, ris, wavelength)};
}

StarRisProfile stack_profile(cvec xbar_t, cvec xbar_r, SlowTimeCodes codes) {
    const Eigen::Index N = xbar_t.size();
    const Eigen::Index P = codes.transmissive.size();
    if (N == 0 || xbar_r.size() != N || codes.reflective.size() != P || P == 0) {
        throw ConfigError("inconsistent profile/code lengths");
    }

    StarRisProfile profile;
    profile.x_t_.resize(P * N);
    profile.x_r_.resize(P * N);
    constexpr double tol = 1e-12;
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index n = 0; n < N; ++n) {
            const complex xt = codes.transmissive[p] * xbar_t[n];
            const complex xr = codes.reflective[p] * xbar_r[n];
            const double energy = std::norm(xt) + std::norm(xr);
            if (std::abs(energy - 1.0) > tol) {
                throw EnergyConservationError("atom " + std::to_string(n) + " at pulse " +
                                              std::to_string(p + 1) + " radiates energy " +
                                              std::to_string(energy) + " != 1");
            }
            profile.x_t_[p * N + n] = xt;
            profile.x_r_[p * N + n] = xr;
        }
    }
    profile.xbar_t_ = std::move(xbar_t);
    profile.xbar_r_ = std::move(xbar_r);
    profile.codes_ = std::move(codes);
    return profile;
}

double array_gain_factor(const cvec& response, const Direction& direction, const FeederChannel& g,
                         const ArrayGeometry& ris, double wavelength) {
    if (response.size() != ris.size() || g.size() != ris.size()) {
        throw ConfigError("response, channel and geometry sizes differ");
    }
    const cvec u = steering_vector(ris, direction, wavelength).entries;
    const complex a = (u.array() * response.array() * g.gains().array()).sum();
    return std::norm(a);
}

double beampattern(const cvec& response, const Direction& direction, const FeederChannel& g,
                   const ArrayGeometry& ris, double wavelength, const ElementGain& gain) {
    const double element = gain ? gain(direction) : 1.0;
    return element * array_gain_factor(response, direction, g, ris, wavelength);
}

BeampatternGrid beampattern_grid(const StarRisProfile& profile, HalfSpace half,
                                 const std::vector<double>& azimuth,
                                 const std::vector<double>& elevation, const FeederChannel& g,
                                 const ArrayGeometry& ris, double wavelength) {
    if (azimuth.empty() || elevation.empty()) {
        throw ConfigError("beampattern grid must have at least one azimuth and one elevation");
    }
    BeampatternGrid grid{azimuth, elevation,
                         Eigen::MatrixXd(static_cast<Eigen::Index>(azimuth.size()),
                                         static_cast<Eigen::Index>(elevation.size()))};
    const cvec& xbar = profile.spatial(half);
    for (std::size_t i = 0; i < azimuth.size(); ++i) {
        for (std::size_t j = 0; j < elevation.size(); ++j) {
            const Direction dir = Direction::from_radians(azimuth[i], elevation[j]);
            if (dir.half_space() != half) {
                throw ConfigError(std::string("beampattern grid leaves the ") + to_string(half) +
                                  " half-space");
            }
            grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                array_gain_factor(xbar, dir, g, ris, wavelength);
        }
    }
    const double peak = grid.values.maxCoeff();
    if (peak > 0) grid.values /= peak;
    return grid;
}

}  // namespace starris
