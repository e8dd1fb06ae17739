#pragma once

#include <vector>

#include <Eigen/Cholesky>

#include "starris/scene.hpp"
#include "starris/types.hpp"

namespace starris {

// Disturbance covariance C = sigma_n^2 I + B B^H, with B = [s_1 h_1, ..., s_K h_K]
// the variance-weighted clutter steering columns. Only the K x K capacitance
// matrix S = sigma_n^2 I_K + B^H B is factored; every solve goes through
//   C^-1 = (I - B S^-1 B^H) / sigma_n^2.
class DisturbanceModel {
public:
    DisturbanceModel(double noise_variance, int pulses, Eigen::Index rx_elements,
                     std::vector<KroneckerSteering> columns, std::vector<double> variances);

    double noise_variance() const noexcept { return noise_variance_; }
    int pulses() const noexcept { return pulses_; }
    Eigen::Index rx_elements() const noexcept { return rx_elements_; }
    Eigen::Index dimension() const noexcept { return pulses_ * rx_elements_; }
    Eigen::Index rank() const noexcept { return static_cast<Eigen::Index>(columns_.size()); }

    // Clutter steering vectors h_k (unweighted) and their variances.
    const std::vector<KroneckerSteering>& columns() const noexcept { return columns_; }
    const std::vector<double>& variances() const noexcept { return variances_; }

    cvec solve(const cvec& v) const;            // C^-1 v
    double quadratic_form(const cvec& v) const;  // v^H C^-1 v
    double whitened_norm(const cvec& v) const;   // ||C^-1/2 v||

    // Structured counterparts, O(K (P + N_rx)) per call.
    cvec project(const cvec& v) const;                  // B^H v
    cvec project(const KroneckerSteering& h) const;     // B^H h
    cvec capacitance_solve(const cvec& r) const;        // S^-1 r
    const Eigen::LLT<cmat>& capacitance() const noexcept { return capacitance_; }
    // B = [s_k tau_k (x) u_k]: P x K weighted temporal and N_rx x K spatial factors.
    const cmat& weighted_temporal() const noexcept { return temporal_; }
    const cmat& spatial_factors() const noexcept { return spatial_; }
    complex inverse_inner(const KroneckerSteering& a, const KroneckerSteering& b) const;  // a^H C^-1 b

    // Materialised C, for oracles and small problems only.
    cmat dense() const;

    // Principal submatrix over pulses [first, first + count): columns are
    // truncated and those that vanish on the window are dropped.
    DisturbanceModel restrict_pulses(int first, int count) const;

private:
    void check_dimension(const cvec& v) const;

    double noise_variance_;
    int pulses_;
    Eigen::Index rx_elements_;
    std::vector<KroneckerSteering> columns_;
    std::vector<double> variances_;
    cmat temporal_;  // P x K, column k scaled by sigma_k
    cmat spatial_;   // N_rx x K
    Eigen::LLT<cmat> capacitance_;
};

}  // namespace starris
