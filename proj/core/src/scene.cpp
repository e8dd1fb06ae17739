#include "starris/scene.hpp"

#include <cmath>
#include <string>

#include "starris/disturbance.hpp"
#include "starris/errors.hpp"

namespace starris {

cvec doppler_vector(double doppler_hz, double pri_s, int pulses) {
    if (pulses < 1) throw ConfigError("doppler_vector needs at least one pulse");
    cvec d(pulses);
    for (int p = 0; p < pulses; ++p) {
        d[p] = std::polar(1.0, 2 * pi * doppler_hz * pri_s * p);
    }
    return d;
}

cvec KroneckerSteering::dense() const {
    const Eigen::Index P = temporal.size();
    const Eigen::Index N = spatial.size();
    cvec h(P * N);
    for (Eigen::Index p = 0; p < P; ++p) {
        h.segment(p * N, N) = temporal[p] * spatial;
    }
    return h;
}

complex inner(const KroneckerSteering& a, const KroneckerSteering& b) {
    return a.temporal.dot(b.temporal) * a.spatial.dot(b.spatial);
}

KroneckerSteering space_time_factors(const RadarSetup& setup, const cvec& stacked_x,
                                     const Direction& direction, double doppler_hz) {
    const Eigen::Index N = setup.ris.size();
    if (N == 0 || stacked_x.size() % N != 0 || stacked_x.size() == 0) {
        throw ConfigError("stacked response length " + std::to_string(stacked_x.size()) +
                          " is not a multiple of N_ris = " + std::to_string(N));
    }
    if (setup.feeder.size() != N) {
        throw ConfigError("feeder channel length does not match the surface size");
    }
    const int P = static_cast<int>(stacked_x.size() / N);
    const double wl = setup.wavelength();

    // u_ris^T diag(g), shared by every PRI block of G(phi)
    const cvec ug = steering_vector(setup.ris, direction, wl).entries.cwiseProduct(setup.feeder.gains());
    cvec temporal = doppler_vector(doppler_hz, setup.pri_s, P);
    for (int p = 0; p < P; ++p) {
        temporal[p] *= ug.cwiseProduct(stacked_x.segment(p * N, N)).sum();
    }
    return {std::move(temporal), steering_vector(setup.rx, direction, wl).entries};
}

cvec space_time_steering(const RadarSetup& setup, const cvec& stacked_x, const Direction& direction,
                         double doppler_hz) {
    return space_time_factors(setup, stacked_x, direction, doppler_hz).dense();
}

KroneckerSteering space_time_factors(const RadarSetup& setup, const StarRisProfile& profile,
                                     const Direction& direction, double doppler_hz) {
    return space_time_factors(setup, profile.stacked(direction.half_space()), direction, doppler_hz);
}

cvec space_time_steering(const RadarSetup& setup, const StarRisProfile& profile,
                         const Direction& direction, double doppler_hz) {
    return space_time_factors(setup, profile, direction, doppler_hz).dense();
}

cvec factored_space_time_steering(const RadarSetup& setup, const cvec& xbar, const cvec& code,
                                  const Direction& direction, double doppler_hz) {
    if (xbar.size() != setup.ris.size()) {
        throw ConfigError("spatial profile length does not match N_ris");
    }
    const double wl = setup.wavelength();
    const cvec u_ris = steering_vector(setup.ris, direction, wl).entries;
    const complex gain = (u_ris.array() * xbar.array() * setup.feeder.gains().array()).sum();
    const cvec temporal =
        doppler_vector(doppler_hz, setup.pri_s, static_cast<int>(code.size())).cwiseProduct(code);
    const cvec u_rx = steering_vector(setup.rx, direction, wl).entries;

    const Eigen::Index N = u_rx.size();
    cvec h(temporal.size() * N);
    for (Eigen::Index p = 0; p < temporal.size(); ++p) {
        h.segment(p * N, N) = (gain * temporal[p]) * u_rx;
    }
    return h;
}

void Scene::validate(double pri_s) const {
    if (!(noise_variance > 0)) throw ConfigError("noise variance must be > 0");
    const double nu_max = 0.5 / pri_s;
    auto check = [&](const PointScatterer& s, HalfSpace half, const char* what) {
        if (s.direction.half_space() != half) {
            throw ConfigError(std::string(what) + " direction is not in the " + to_string(half) +
                              " half-space");
        }
        if (!(std::abs(s.doppler_hz) < nu_max)) {
            throw ConfigError(std::string(what) + " Doppler " + std::to_string(s.doppler_hz) +
                              " Hz is outside the unambiguous interval (+-" + std::to_string(nu_max) +
                              " Hz)");
        }
        if (!(s.amplitude_variance >= 0)) {
            throw ConfigError(std::string(what) + " amplitude variance must be >= 0");
        }
    };
    if (target_t) check(*target_t, HalfSpace::transmissive, "transmissive target");
    if (target_r) check(*target_r, HalfSpace::reflective, "reflective target");
    for (const auto& c : clutter_t) check(c, HalfSpace::transmissive, "transmissive clutter");
    for (const auto& c : clutter_r) check(c, HalfSpace::reflective, "reflective clutter");
}

double calibrate_amplitude_variance(double snr_linear, double steering_squared_norm,
                                    double noise_variance, int pulses) {
    if (!(steering_squared_norm > 0)) {
        throw DegenerateCellError("cannot calibrate an amplitude against a zero-norm steering vector");
    }
    return snr_linear * pulses * noise_variance / steering_squared_norm;
}

double calibrate_amplitude_variance(double snr_linear, const cvec& steering, double noise_variance,
                                    int pulses) {
    return calibrate_amplitude_variance(snr_linear, steering.squaredNorm(), noise_variance, pulses);
}

complex circular_normal(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = std::sqrt(0.5 * variance);
    const double re = normal(rng);
    const double im = normal(rng);
    return {s * re, s * im};
}

cvec synthesize_observation(const RadarSetup& setup, const Scene& scene,
                            const StarRisProfile& profile, std::mt19937_64& rng,
                            SynthesisOptions options) {
    scene.validate(setup.pri_s);
    const Eigen::Index dim = profile.pulses() * setup.rx.size();
    cvec y = cvec::Zero(dim);

    auto add = [&](const PointScatterer& s) {
        const complex alpha = s.fixed_amplitude ? *s.fixed_amplitude
                                                : circular_normal(rng, s.amplitude_variance);
        const KroneckerSteering h = space_time_factors(setup, profile, s.direction, s.doppler_hz);
        const Eigen::Index N = h.spatial.size();
        for (Eigen::Index p = 0; p < h.temporal.size(); ++p) {
            y.segment(p * N, N) += (alpha * h.temporal[p]) * h.spatial;
        }
    };
    if (scene.target_t) add(*scene.target_t);
    if (scene.target_r) add(*scene.target_r);
    for (const auto& c : scene.clutter_t) add(c);
    for (const auto& c : scene.clutter_r) add(c);

    if (options.add_noise) {
        for (auto& v : y) v += circular_normal(rng, scene.noise_variance);
    }
    return y;
}

DisturbanceModel build_covariance(const RadarSetup& setup, const Scene& scene,
                                  const StarRisProfile& profile) {
    scene.validate(setup.pri_s);
    std::vector<KroneckerSteering> columns;
    std::vector<double> variances;
    columns.reserve(scene.clutter_t.size() + scene.clutter_r.size());
    for (const auto* list : {&scene.clutter_t, &scene.clutter_r}) {
        for (const auto& c : *list) {
            columns.push_back(space_time_factors(setup, profile, c.direction, c.doppler_hz));
            variances.push_back(c.amplitude_variance);
        }
    }
    return DisturbanceModel(scene.noise_variance, profile.pulses(), setup.rx.size(), std::move(columns),
                            std::move(variances));
}

}  // namespace starris
