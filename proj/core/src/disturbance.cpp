#include "starris/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "starris/errors.hpp"

namespace starris {

DisturbanceModel::DisturbanceModel(double noise_variance, int pulses, Eigen::Index rx_elements,
                                   std::vector<KroneckerSteering> columns,
                                   std::vector<double> variances)
    : noise_variance_(noise_variance), pulses_(pulses), rx_elements_(rx_elements),
      columns_(std::move(columns)), variances_(std::move(variances)) {
    if (!(noise_variance_ > 0)) throw ConfigError("noise variance must be > 0");
    if (pulses_ < 1 || rx_elements_ < 1) throw ConfigError("disturbance dimension must be positive");
    if (columns_.size() != variances_.size()) {
        throw ConfigError("clutter column and variance counts differ");
    }
    const auto K = static_cast<Eigen::Index>(columns_.size());
    temporal_.resize(pulses_, K);
    spatial_.resize(rx_elements_, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& c = columns_[static_cast<std::size_t>(k)];
        const double var = variances_[static_cast<std::size_t>(k)];
        if (!(var >= 0)) throw ConfigError("clutter variance must be >= 0");
        if (c.temporal.size() != pulses_ || c.spatial.size() != rx_elements_) {
            throw ConfigError("clutter column " + std::to_string(k) + " has the wrong shape");
        }
        temporal_.col(k) = std::sqrt(var) * c.temporal;
        spatial_.col(k) = c.spatial;
    }
    cmat S = (temporal_.adjoint() * temporal_).cwiseProduct(spatial_.adjoint() * spatial_);
    S.diagonal().array() += noise_variance_;
    capacitance_.compute(S);
}

void DisturbanceModel::check_dimension(const cvec& v) const {
    if (v.size() != dimension()) {
        throw ConfigError("vector length " + std::to_string(v.size()) +
                          " does not match the disturbance dimension " + std::to_string(dimension()));
    }
}

cvec DisturbanceModel::project(const cvec& v) const {
    check_dimension(v);
    if (rank() == 0) return cvec(0);
    Eigen::Map<const cmat> blocks(v.data(), rx_elements_, pulses_);
    // W(k, p) = u_k^H v_p
    const cmat W = spatial_.adjoint() * blocks;
    return W.cwiseProduct(temporal_.adjoint()).rowwise().sum();
}

cvec DisturbanceModel::project(const KroneckerSteering& h) const {
    if (rank() == 0) return cvec(0);
    return (temporal_.adjoint() * h.temporal).cwiseProduct(spatial_.adjoint() * h.spatial);
}

cvec DisturbanceModel::capacitance_solve(const cvec& r) const {
    if (rank() == 0) return cvec(0);
    return capacitance_.solve(r);
}

cvec DisturbanceModel::solve(const cvec& v) const {
    check_dimension(v);
    if (rank() == 0) return v / noise_variance_;
    const cvec coeffs = capacitance_.solve(project(v));
    // B coeffs as an N_rx x P block matrix: spatial diag(coeffs) temporal^T
    const cmat correction = spatial_ * coeffs.asDiagonal() * temporal_.transpose();
    cvec out = v;
    Eigen::Map<cmat>(out.data(), rx_elements_, pulses_) -= correction;
    return out / noise_variance_;
}

double DisturbanceModel::quadratic_form(const cvec& v) const {
    check_dimension(v);
    double q = v.squaredNorm();
    if (rank() > 0) {
        const cvec r = capacitance_.matrixL().solve(project(v));
        q -= r.squaredNorm();
    }
    return q / noise_variance_;
}

double DisturbanceModel::whitened_norm(const cvec& v) const {
    return std::sqrt(std::max(0.0, quadratic_form(v)));
}

complex DisturbanceModel::inverse_inner(const KroneckerSteering& a, const KroneckerSteering& b) const {
    complex value = inner(a, b);
    if (rank() > 0) {
        value -= project(a).dot(capacitance_.solve(project(b)));
    }
    return value / noise_variance_;
}

cmat DisturbanceModel::dense() const {
    const Eigen::Index D = dimension();
    cmat C = cmat::Zero(D, D);
    C.diagonal().setConstant(noise_variance_);
    for (Eigen::Index k = 0; k < rank(); ++k) {
        const cvec b = KroneckerSteering{temporal_.col(k), spatial_.col(k)}.dense();
        C.noalias() += b * b.adjoint();
    }
    return C;
}

DisturbanceModel DisturbanceModel::restrict_pulses(int first, int count) const {
    if (first < 0 || count < 1 || first + count > pulses_) {
        throw ConfigError("pulse window outside the CPI");
    }
    std::vector<KroneckerSteering> kept;
    std::vector<double> kept_var;
    for (std::size_t k = 0; k < columns_.size(); ++k) {
        cvec window = columns_[k].temporal.segment(first, count);
        if (window.cwiseAbs2().maxCoeff() == 0.0) continue;
        kept.push_back({std::move(window), columns_[k].spatial});
        kept_var.push_back(variances_[k]);
    }
    return DisturbanceModel(noise_variance_, count, rx_elements_, std::move(kept), std::move(kept_var));
}

}  // namespace starris
