#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "starris/disturbance.hpp"
#include "starris/ris.hpp"
#include "starris/scene.hpp"
#include "starris/types.hpp"

namespace starris {

// Uniformly spaced Doppler hypotheses strictly inside (-1/(2T), 1/(2T)).
class DopplerGrid {
public:
    // Step 1 / (oversampling * P * T); values k * step for every integer k
    // with |k * step| < 1/(2T).
    static DopplerGrid uniform(double pri_s, int pulses, int oversampling = 8);
    // lo, lo + step, ... up to hi inclusive; the whole range must lie inside
    // the unambiguous interval.
    static DopplerGrid over_interval(double lo_hz, double hi_hz, double step_hz, double pri_s);

    // Grid points in [lo_hz, hi_hz]; throws ConfigError if none remain.
    DopplerGrid restricted(double lo_hz, double hi_hz) const;

    const std::vector<double>& values() const noexcept { return values_; }
    double step() const noexcept { return step_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    DopplerGrid(std::vector<double> values, double step) : values_(std::move(values)), step_(step) {}

    std::vector<double> values_;
    double step_;
};

enum class Hypothesis { H0, H1t, H1r, H2 };

const char* to_string(Hypothesis h);
int declared_targets(Hypothesis h);

// Matched filters of one resolution cell over the Doppler grid:
//   q(nu) = h(nu)^H C^-1 y,   n(nu) = h(nu)^H C^-1 h(nu).
// Every h(nu) shares the cell's spatial factor; its temporal factor is
// d(nu) . base on the pulse window [first_pulse, first_pulse + P').
class CellFilterBank {
public:
    CellFilterBank(const DisturbanceModel& model, const cvec& spatial, const cvec& base_temporal,
                   int first_pulse, double pri_s, const DopplerGrid& grid);

    std::size_t size() const noexcept { return norms_.size(); }
    double norm(std::size_t i) const { return norms_[static_cast<Eigen::Index>(i)]; }
    const Eigen::VectorXd& norms() const noexcept { return norms_; }
    KroneckerSteering steering(std::size_t i) const;

    // y must live in the model's space; projected_y = model.project(y).
    cvec match(const cvec& y, const cvec& projected_y) const;

    // h(nu_i)^H C^-1 h'(nu_j) for every grid pair of two cells sharing a model.
    cmat cross(const CellFilterBank& other) const;

private:
    double noise_variance_;
    Eigen::Index rx_elements_;
    cvec spatial_;
    cmat temporal_;   // P' x G
    cmat projected_;  // K x G: B^H h(nu)
    cmat solved_;     // K x G: S^-1 B^H h(nu)
    Eigen::VectorXd norms_;
};

struct MatchedOutputs {
    cvec t;  // h_t(nu)^H C^-1 y
    cvec r;
};

// Eta-independent summary of one observation: everything the GIC rule needs.
struct TrialStatistics {
    double max_t = 0.0;
    std::size_t arg_t = 0;
    double max_r = 0.0;
    std::size_t arg_r = 0;
    double max_pair = 0.0;
    std::size_t pair_t = 0;
    std::size_t pair_r = 0;
    bool degenerate_pair = false;
};

struct Decision {
    Hypothesis hypothesis = Hypothesis::H0;
    std::optional<double> doppler_t;
    std::optional<double> doppler_r;
    std::optional<double> velocity_t;
    std::optional<double> velocity_r;
    // Penalised objectives in the order H0, H1t, H1r, H2.
    std::array<double, 4> objective{};
    bool degenerate_pair = false;
};

// Argmax of {0, max_t - eta, max_r - eta, max_pair - 2 eta}; ties go to the
// hypothesis with fewer targets.
Hypothesis select_hypothesis(double max_t, double max_r, double max_pair, double eta);

Decision decide(const TrialStatistics& stats, const DopplerGrid& grid, double eta, double carrier_hz);

// Precomputed whitened quantities for the transmissive/reflective cell pair.
class DetectorBank {
public:
    static DetectorBank build(std::shared_ptr<const DisturbanceModel> disturbance,
                              const RadarSetup& setup, const StarRisProfile& profile,
                              const Direction& dir_t, const Direction& dir_r, DopplerGrid grid,
                              double eta);

    const DopplerGrid& grid() const noexcept { return grid_; }
    double eta() const noexcept { return eta_; }
    double carrier_hz() const noexcept { return carrier_hz_; }
    const DisturbanceModel& disturbance() const noexcept { return *disturbance_; }
    const CellFilterBank& cell(HalfSpace half) const noexcept {
        return half == HalfSpace::transmissive ? cell_t_ : cell_r_;
    }
    // rho(nu_t, nu_r) = h_t^H C^-1 h_r
    complex cross(std::size_t i, std::size_t j) const { return cross_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
    bool pair_degenerate(std::size_t i, std::size_t j) const;

    MatchedOutputs match(const cvec& y) const;
    TrialStatistics statistics(const MatchedOutputs& q) const;
    TrialStatistics statistics(const cvec& y) const { return statistics(match(y)); }

    struct PairValue {
        double value;
        bool degenerate;
    };
    // ||Pi^H y||^2 for one grid pair, given the matched outputs.
    PairValue pair_value(const MatchedOutputs& q, std::size_t i, std::size_t j) const;

private:
    DetectorBank(std::shared_ptr<const DisturbanceModel> disturbance, DopplerGrid grid, double eta,
                 double carrier_hz, CellFilterBank cell_t, CellFilterBank cell_r);

    std::shared_ptr<const DisturbanceModel> disturbance_;
    DopplerGrid grid_;
    double eta_;
    double carrier_hz_;
    CellFilterBank cell_t_;
    CellFilterBank cell_r_;
    cmat cross_;                // rho
    cmat residual_coef_;        // conj(rho) / n_t
    Eigen::MatrixXd schur_;     // n_r - |rho|^2 / n_t, 0 where degenerate
};

// |pi(nu)^H y|^2 = |h^H C^-1 y|^2 / (h^H C^-1 h)
double single_statistic(const DetectorBank& bank, HalfSpace half, std::size_t grid_index,
                        const cvec& y);
// ||Pi^H(nu_t, nu_r) y||^2; falls back to the larger single statistic and
// sets `degenerate` when the two steering vectors are collinear.
DetectorBank::PairValue pair_statistic(const DetectorBank& bank, std::size_t i, std::size_t j,
                                       const cvec& y);

Decision gic_decide(const DetectorBank& bank, const cvec& y);

// Two independent binary tests on the first and last P/2 pulses; valid only
// for time-division codes (c_r = 0 on the first half, c_t = 0 on the second).
class SequentialDetector {
public:
    static SequentialDetector build(const DisturbanceModel& disturbance, const RadarSetup& setup,
                                    const StarRisProfile& profile, const Direction& dir_t,
                                    const Direction& dir_r, DopplerGrid grid, double eta);

    const DopplerGrid& grid() const noexcept { return grid_; }
    double eta() const noexcept { return eta_; }
    double carrier_hz() const noexcept { return carrier_hz_; }
    const DisturbanceModel& half_model(HalfSpace half) const noexcept {
        return half == HalfSpace::transmissive ? *model_t_ : *model_r_;
    }
    const CellFilterBank& cell(HalfSpace half) const noexcept {
        return half == HalfSpace::transmissive ? cell_t_ : cell_r_;
    }

    // max_pair is max_t + max_r (the pair search separates).
    TrialStatistics statistics(const cvec& y) const;

private:
    SequentialDetector(DopplerGrid grid, double eta, double carrier_hz,
                       std::shared_ptr<const DisturbanceModel> model_t,
                       std::shared_ptr<const DisturbanceModel> model_r, CellFilterBank cell_t,
                       CellFilterBank cell_r);

    DopplerGrid grid_;
    double eta_;
    double carrier_hz_;
    std::shared_ptr<const DisturbanceModel> model_t_;
    std::shared_ptr<const DisturbanceModel> model_r_;
    CellFilterBank cell_t_;
    CellFilterBank cell_r_;
};

bool is_time_division(const SlowTimeCodes& codes);

Decision sequential_decide(const SequentialDetector& detector, const cvec& y);

// v = c nu / (2 f_o)
double doppler_to_velocity(double doppler_hz, double carrier_hz);

}  // namespace starris
