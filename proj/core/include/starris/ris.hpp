#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "starris/array.hpp"
#include "starris/types.hpp"

namespace starris {

enum class Policy { simultaneous, sequential };

const char* to_string(Policy policy);
Policy policy_from_string(const std::string& name);

// Scanning rule over one CPI of `pulses` PRIs. The pulse count must be even.
struct ScanningPolicy {
    Policy kind = Policy::simultaneous;
    int pulses = 16;
};

// Slow-time amplitude/phase codes applied to the transmitted and reflected
// waves; one entry per PRI.
struct SlowTimeCodes {
    cvec transmissive;
    cvec reflective;

    const cvec& operator[](HalfSpace half) const {
        return half == HalfSpace::transmissive ? transmissive : reflective;
    }
};

// simultaneous: c_t[p] = (-1)^p / sqrt(2), c_r[p] = 1 / sqrt(2)   (p = 1..P)
// sequential:   (c_t, c_r) = (1, 0) for the first P/2 pulses, (0, 1) after.
SlowTimeCodes make_codes(const ScanningPolicy& policy);

// Transmitter -> surface channel, one complex gain per atom.
class FeederChannel {
public:
    explicit FeederChannel(cvec gains);

    const cvec& gains() const noexcept { return gains_; }
    Eigen::Index size() const noexcept { return gains_.size(); }

private:
    cvec gains_;
};

// i.i.d. CN(0, 1) entries.
FeederChannel random_feeder_channel(Eigen::Index atoms, std::mt19937_64& rng);

struct PhaseProfiles {
    cvec transmissive;
    cvec reflective;
};

// Unit-modulus atom responses that co-phase every term of u^T diag(x) g
// towards dir_t (transmissive) and dir_r (reflective).
PhaseProfiles synthesize_profiles(const FeederChannel& g, const Direction& dir_t,
                                  const Direction& dir_r, const ArrayGeometry& ris,
                                  double wavelength);

// Spatial profiles combined with slow-time codes: x = c (x) xbar for each
// half-space, stacked over P PRIs (P * N_ris entries, pulse-major).
class StarRisProfile {
public:
    const cvec& spatial(HalfSpace half) const noexcept {
        return half == HalfSpace::transmissive ? xbar_t_ : xbar_r_;
    }
    const cvec& code(HalfSpace half) const noexcept { return codes_[half]; }
    const cvec& stacked(HalfSpace half) const noexcept {
        return half == HalfSpace::transmissive ? x_t_ : x_r_;
    }
    const SlowTimeCodes& codes() const noexcept { return codes_; }
    int pulses() const noexcept { return static_cast<int>(codes_.transmissive.size()); }
    Eigen::Index atoms() const noexcept { return xbar_t_.size(); }

private:
    friend StarRisProfile stack_profile(cvec xbar_t, cvec xbar_r, SlowTimeCodes codes);
    StarRisProfile() = default;

    cvec xbar_t_, xbar_r_;
    SlowTimeCodes codes_;
    cvec x_t_, x_r_;
};

// Throws EnergyConservationError when the stacked responses break
// |x_t|^2 + |x_r|^2 = 1 on any atom/PRI (tolerance 1e-12).
StarRisProfile stack_profile(cvec xbar_t, cvec xbar_r, SlowTimeCodes codes);

// GF = |u_ris^T(phi) diag(x) g|^2
double array_gain_factor(const cvec& response, const Direction& direction, const FeederChannel& g,
                         const ArrayGeometry& ris, double wavelength);

using ElementGain = std::function<double(const Direction&)>;

// G_ris(phi) * GF. The default element gain is isotropic (1).
double beampattern(const cvec& response, const Direction& direction, const FeederChannel& g,
                   const ArrayGeometry& ris, double wavelength, const ElementGain& gain = {});

struct BeampatternGrid {
    std::vector<double> azimuth;    // rad
    std::vector<double> elevation;  // rad
    Eigen::MatrixXd values;         // rows: azimuth, cols: elevation; max-normalised
};

// Normalised gain factor of `half`'s spatial profile over az x el. Every grid
// azimuth must belong to `half`.
BeampatternGrid beampattern_grid(const StarRisProfile& profile, HalfSpace half,
                                 const std::vector<double>& azimuth,
                                 const std::vector<double>& elevation, const FeederChannel& g,
                                 const ArrayGeometry& ris, double wavelength);

}  // namespace starris
