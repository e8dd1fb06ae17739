#pragma once

#include <optional>
#include <random>
#include <vector>

#include "starris/array.hpp"
#include "starris/ris.hpp"
#include "starris/types.hpp"

namespace starris {

// Everything about the hardware that stays fixed over a CPI.
struct RadarSetup {
    ArrayGeometry ris;
    ArrayGeometry rx;
    double carrier_hz;
    double pri_s;
    FeederChannel feeder;

    double wavelength() const noexcept { return speed_of_light / carrier_hz; }
    // Unambiguous Doppler half-width 1/(2T).
    double max_doppler() const noexcept { return 0.5 / pri_s; }
};

// d(nu)[p] = exp(i 2pi nu T p), p = 0..P-1
cvec doppler_vector(double doppler_hz, double pri_s, int pulses);

// h = temporal (x) spatial, with temporal of length P and spatial of length
// N_rx. Every space-time steering vector of the model has this shape, so
// inner products reduce to one P-length and one N_rx-length product.
struct KroneckerSteering {
    cvec temporal;
    cvec spatial;

    cvec dense() const;
    double squared_norm() const { return temporal.squaredNorm() * spatial.squaredNorm(); }
};

// a^H b
complex inner(const KroneckerSteering& a, const KroneckerSteering& b);

// Temporal factor d(nu) . G(phi) x and spatial factor u_rx(phi) for a stacked
// response x of length P * N_ris. Throws ConfigError on a length mismatch.
KroneckerSteering space_time_factors(const RadarSetup& setup, const cvec& stacked_x,
                                     const Direction& direction, double doppler_hz);

// h(x, phi, nu) = (d(nu) . G(phi) x) (x) u_rx(phi)
cvec space_time_steering(const RadarSetup& setup, const cvec& stacked_x, const Direction& direction,
                         double doppler_hz);

// Same as above with x picked from the profile by the direction's half-space.
cvec space_time_steering(const RadarSetup& setup, const StarRisProfile& profile,
                         const Direction& direction, double doppler_hz);
KroneckerSteering space_time_factors(const RadarSetup& setup, const StarRisProfile& profile,
                                     const Direction& direction, double doppler_hz);

// Factored form for x = c (x) xbar:
//   h = (u_ris^T diag(xbar) g) [(d(nu) . c) (x) u_rx]
cvec factored_space_time_steering(const RadarSetup& setup, const cvec& xbar, const cvec& code,
                                  const Direction& direction, double doppler_hz);

struct PointScatterer {
    Direction direction;
    double doppler_hz = 0.0;
    // Swerling I: one CN(0, amplitude_variance) draw per CPI.
    double amplitude_variance = 0.0;
    // When set, used instead of a random draw.
    std::optional<complex> fixed_amplitude;
};

struct Scene {
    std::optional<PointScatterer> target_t;
    std::optional<PointScatterer> target_r;
    std::vector<PointScatterer> clutter_t;
    std::vector<PointScatterer> clutter_r;
    double noise_variance = 1.0;

    // Throws ConfigError on half-space, Doppler or variance violations.
    void validate(double pri_s) const;
};

// sigma^2 = snr * P * sigma_n^2 / ||h||^2, the inverse of
// SNR_p = sigma^2 ||h||^2 / (P sigma_n^2).
double calibrate_amplitude_variance(double snr_linear, double steering_squared_norm,
                                    double noise_variance, int pulses);
double calibrate_amplitude_variance(double snr_linear, const cvec& steering, double noise_variance,
                                    int pulses);

struct SynthesisOptions {
    bool add_noise = true;
};

// y = alpha_t h_t + alpha_r h_r + sum_k alpha_k h_k + z_n.
// Draw order: target_t, target_r, clutter_t..., clutter_r..., noise.
cvec synthesize_observation(const RadarSetup& setup, const Scene& scene,
                            const StarRisProfile& profile, std::mt19937_64& rng,
                            SynthesisOptions options = {});

complex circular_normal(std::mt19937_64& rng, double variance);

class DisturbanceModel;

// C = sigma_n^2 I + sum_k sigma_k^2 h_k h_k^H over all clutter of the scene.
DisturbanceModel build_covariance(const RadarSetup& setup, const Scene& scene,
                                  const StarRisProfile& profile);

}  // namespace starris
