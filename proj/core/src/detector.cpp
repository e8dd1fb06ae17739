#include "starris/detector.hpp"

#include <cmath>
#include <string>

#include "starris/errors.hpp"

namespace starris {

DopplerGrid DopplerGrid::uniform(double pri_s, int pulses, int oversampling) {
    if (!(pri_s > 0) || pulses < 1 || oversampling < 1) {
        throw ConfigError("Doppler grid needs T > 0, P >= 1 and oversampling >= 1");
    }
    const double step = 1.0 / (oversampling * pulses * pri_s);
    const double nu_max = 0.5 / pri_s;
    // largest k with k * step < nu_max
    long k_max = static_cast<long>(std::floor(nu_max / step));
    while (k_max > 0 && !(k_max * step < nu_max)) --k_max;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(2 * k_max + 1));
    for (long k = -k_max; k <= k_max; ++k) values.push_back(static_cast<double>(k) * step);
    return DopplerGrid(std::move(values), step);
}

DopplerGrid DopplerGrid::over_interval(double lo_hz, double hi_hz, double step_hz, double pri_s) {
    const double nu_max = 0.5 / pri_s;
    if (!(step_hz > 0)) throw ConfigError("Doppler grid step must be > 0");
    if (!(lo_hz <= hi_hz)) throw ConfigError("Doppler search interval must satisfy min <= max");
    if (!(lo_hz > -nu_max) || !(hi_hz < nu_max)) {
        throw ConfigError("Doppler search interval must lie strictly inside (+-" +
                          std::to_string(nu_max) + " Hz)");
    }
    std::vector<double> values;
    const auto count = static_cast<long>(std::floor((hi_hz - lo_hz) / step_hz + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) values.push_back(lo_hz + static_cast<double>(k) * step_hz);
    return DopplerGrid(std::move(values), step_hz);
}

DopplerGrid DopplerGrid::restricted(double lo_hz, double hi_hz) const {
    std::vector<double> kept;
    for (double v : values_) {
        if (v >= lo_hz && v <= hi_hz) kept.push_back(v);
    }
    if (kept.empty()) throw ConfigError("Doppler search interval contains no grid point");
    return DopplerGrid(std::move(kept), step_);
}

const char* to_string(Hypothesis h) {
    switch (h) {
    case Hypothesis::H0: return "H0";
    case Hypothesis::H1t: return "H1t";
    case Hypothesis::H1r: return "H1r";
    case Hypothesis::H2: return "H2";
    }
    return "?";
}

int declared_targets(Hypothesis h) {
    switch (h) {
    case Hypothesis::H0: return 0;
    case Hypothesis::H1t:
    case Hypothesis::H1r: return 1;
    case Hypothesis::H2: return 2;
    }
    return 0;
}

double doppler_to_velocity(double doppler_hz, double carrier_hz) {
    return speed_of_light * doppler_hz / (2.0 * carrier_hz);
}

// ---------------------------------------------------------------------------

CellFilterBank::CellFilterBank(const DisturbanceModel& model, const cvec& spatial,
                               const cvec& base_temporal, int first_pulse, double pri_s,
                               const DopplerGrid& grid)
    : noise_variance_(model.noise_variance()), rx_elements_(model.rx_elements()), spatial_(spatial) {
    const Eigen::Index P = base_temporal.size();
    const auto G = static_cast<Eigen::Index>(grid.size());
    if (P != model.pulses() || spatial.size() != model.rx_elements()) {
        throw ConfigError("cell steering does not match the disturbance dimension");
    }
    if (G == 0) throw ConfigError("Doppler grid is empty");

    temporal_.resize(P, G);
    for (Eigen::Index i = 0; i < G; ++i) {
        const double nu = grid[static_cast<std::size_t>(i)];
        for (Eigen::Index p = 0; p < P; ++p) {
            temporal_(p, i) = std::polar(1.0, 2 * pi * nu * pri_s * static_cast<double>(first_pulse + p)) *
                              base_temporal[p];
        }
    }

    const double spatial_energy = spatial_.squaredNorm();
    Eigen::VectorXd energy = temporal_.colwise().squaredNorm().transpose() * spatial_energy;
    norms_ = energy;
    if (model.rank() > 0) {
        const cvec spatial_proj = model.spatial_factors().adjoint() * spatial_;
        projected_ = (model.weighted_temporal().adjoint() * temporal_).array().colwise() *
                     spatial_proj.array();
        solved_ = model.capacitance().solve(projected_);
        norms_ -= projected_.cwiseProduct(solved_.conjugate()).colwise().sum().real().transpose();
    } else {
        projected_.resize(0, G);
        solved_.resize(0, G);
    }
    norms_ /= noise_variance_;

    for (Eigen::Index i = 0; i < G; ++i) {
        if (!(energy[i] > 0) || !(norms_[i] > 0)) {
            throw DegenerateCellError("zero-norm steering vector at Doppler " +
                                      std::to_string(grid[static_cast<std::size_t>(i)]) + " Hz");
        }
    }
}

KroneckerSteering CellFilterBank::steering(std::size_t i) const {
    return {temporal_.col(static_cast<Eigen::Index>(i)), spatial_};
}

cvec CellFilterBank::match(const cvec& y, const cvec& projected_y) const {
    const Eigen::Index P = temporal_.rows();
    if (y.size() != P * rx_elements_) throw ConfigError("observation length mismatch");
    Eigen::Map<const cmat> blocks(y.data(), rx_elements_, P);
    // s_p = u^H y_p
    const cvec s = blocks.transpose() * spatial_.conjugate();
    cvec q = temporal_.adjoint() * s;
    if (solved_.rows() > 0) q.noalias() -= solved_.adjoint() * projected_y;
    return q / noise_variance_;
}

cmat CellFilterBank::cross(const CellFilterBank& other) const {
    const complex spatial_inner = spatial_.dot(other.spatial_);
    cmat rho = (temporal_.adjoint() * other.temporal_) * spatial_inner;
    if (solved_.rows() > 0) rho.noalias() -= solved_.adjoint() * other.projected_;
    return rho / noise_variance_;
}

// ---------------------------------------------------------------------------

Hypothesis select_hypothesis(double max_t, double max_r, double max_pair, double eta) {
    Hypothesis best = Hypothesis::H0;
    double best_value = 0.0;
    const std::array<std::pair<Hypothesis, double>, 3> candidates{{
        {Hypothesis::H1t, max_t - eta},
        {Hypothesis::H1r, max_r - eta},
        {Hypothesis::H2, max_pair - 2 * eta},
    }};
    for (const auto& [h, v] : candidates) {
        if (v > best_value) {
            best = h;
            best_value = v;
        }
    }
    return best;
}

namespace {

void fill_estimates(Decision& d, const DopplerGrid& grid, std::size_t t, std::size_t r,
                    double carrier_hz) {
    const bool has_t = d.hypothesis == Hypothesis::H1t || d.hypothesis == Hypothesis::H2;
    const bool has_r = d.hypothesis == Hypothesis::H1r || d.hypothesis == Hypothesis::H2;
    if (has_t) {
        d.doppler_t = grid[t];
        d.velocity_t = doppler_to_velocity(grid[t], carrier_hz);
    }
    if (has_r) {
        d.doppler_r = grid[r];
        d.velocity_r = doppler_to_velocity(grid[r], carrier_hz);
    }
}

}  // namespace

Decision decide(const TrialStatistics& stats, const DopplerGrid& grid, double eta, double carrier_hz) {
    Decision d;
    d.hypothesis = select_hypothesis(stats.max_t, stats.max_r, stats.max_pair, eta);
    d.objective = {0.0, stats.max_t - eta, stats.max_r - eta, stats.max_pair - 2 * eta};
    if (d.hypothesis == Hypothesis::H2) {
        d.degenerate_pair = stats.degenerate_pair;
        fill_estimates(d, grid, stats.pair_t, stats.pair_r, carrier_hz);
    } else {
        fill_estimates(d, grid, stats.arg_t, stats.arg_r, carrier_hz);
    }
    return d;
}

// ---------------------------------------------------------------------------

namespace {

// G(phi) x: the per-pulse surface gain towards `dir`, Doppler excluded.
cvec surface_temporal(const RadarSetup& setup, const StarRisProfile& profile, const Direction& dir) {
    return space_time_factors(setup, profile, dir, 0.0).temporal;
}

void check_cell_directions(const Direction& dir_t, const Direction& dir_r) {
    if (dir_t.half_space() != HalfSpace::transmissive) {
        throw ConfigError("transmissive cell direction must have azimuth in (90, 270) degrees");
    }
    if (dir_r.half_space() != HalfSpace::reflective) {
        throw ConfigError("reflective cell direction must have azimuth in (-90, 90) degrees");
    }
}

constexpr double degenerate_tol = 1e-9;

}  // namespace

DetectorBank::DetectorBank(std::shared_ptr<const DisturbanceModel> disturbance, DopplerGrid grid,
                           double eta, double carrier_hz, CellFilterBank cell_t, CellFilterBank cell_r)
    : disturbance_(std::move(disturbance)), grid_(std::move(grid)), eta_(eta),
      carrier_hz_(carrier_hz), cell_t_(std::move(cell_t)), cell_r_(std::move(cell_r)) {
    cross_ = cell_t_.cross(cell_r_);
    const auto G = static_cast<Eigen::Index>(grid_.size());
    residual_coef_.resize(G, G);
    schur_.resize(G, G);
    for (Eigen::Index j = 0; j < G; ++j) {
        const double n_r = cell_r_.norms()[j];
        for (Eigen::Index i = 0; i < G; ++i) {
            const double n_t = cell_t_.norms()[i];
            const complex rho = cross_(i, j);
            const double schur = n_r - std::norm(rho) / n_t;
            if (schur > degenerate_tol * n_r) {
                residual_coef_(i, j) = std::conj(rho) / n_t;
                schur_(i, j) = schur;
            } else {
                residual_coef_(i, j) = 0.0;
                schur_(i, j) = 0.0;
            }
        }
    }
}

DetectorBank DetectorBank::build(std::shared_ptr<const DisturbanceModel> disturbance,
                                 const RadarSetup& setup, const StarRisProfile& profile,
                                 const Direction& dir_t, const Direction& dir_r, DopplerGrid grid,
                                 double eta) {
    if (!disturbance) throw ConfigError("detector bank needs a disturbance model");
    if (!(eta >= 0)) throw ConfigError("GIC penalty must be >= 0");
    check_cell_directions(dir_t, dir_r);
    if (disturbance->pulses() != profile.pulses() || disturbance->rx_elements() != setup.rx.size()) {
        throw ConfigError("disturbance model does not match the profile/receiver dimensions");
    }
    const double wl = setup.wavelength();
    CellFilterBank cell_t(*disturbance, steering_vector(setup.rx, dir_t, wl).entries,
                          surface_temporal(setup, profile, dir_t), 0, setup.pri_s, grid);
    CellFilterBank cell_r(*disturbance, steering_vector(setup.rx, dir_r, wl).entries,
                          surface_temporal(setup, profile, dir_r), 0, setup.pri_s, grid);
    return DetectorBank(std::move(disturbance), std::move(grid), eta, setup.carrier_hz,
                        std::move(cell_t), std::move(cell_r));
}

bool DetectorBank::pair_degenerate(std::size_t i, std::size_t j) const {
    return schur_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0.0;
}

MatchedOutputs DetectorBank::match(const cvec& y) const {
    const cvec projected = disturbance_->project(y);
    return {cell_t_.match(y, projected), cell_r_.match(y, projected)};
}

DetectorBank::PairValue DetectorBank::pair_value(const MatchedOutputs& q, std::size_t i,
                                                 std::size_t j) const {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    const double t = std::norm(q.t[ii]) / cell_t_.norms()[ii];
    const double schur = schur_(ii, jj);
    if (schur == 0.0) {
        const double r = std::norm(q.r[jj]) / cell_r_.norms()[jj];
        return {std::max(t, r), true};
    }
    return {t + std::norm(q.r[jj] - residual_coef_(ii, jj) * q.t[ii]) / schur, false};
}

TrialStatistics DetectorBank::statistics(const MatchedOutputs& q) const {
    const auto G = static_cast<Eigen::Index>(grid_.size());
    TrialStatistics s;
    Eigen::VectorXd t(G), r(G);
    for (Eigen::Index i = 0; i < G; ++i) {
        t[i] = std::norm(q.t[i]) / cell_t_.norms()[i];
        r[i] = std::norm(q.r[i]) / cell_r_.norms()[i];
    }
    s.max_t = -1.0;
    s.max_r = -1.0;
    for (Eigen::Index i = 0; i < G; ++i) {
        if (t[i] > s.max_t) {
            s.max_t = t[i];
            s.arg_t = static_cast<std::size_t>(i);
        }
        if (r[i] > s.max_r) {
            s.max_r = r[i];
            s.arg_r = static_cast<std::size_t>(i);
        }
    }

    s.max_pair = -1.0;
    for (Eigen::Index i = 0; i < G; ++i) {
        const complex qt = q.t[i];
        const double ti = t[i];
        for (Eigen::Index j = 0; j < G; ++j) {
            const double schur = schur_(i, j);
            double v;
            if (schur == 0.0) {
                v = std::max(ti, r[j]);
            } else {
                v = ti + std::norm(q.r[j] - residual_coef_(i, j) * qt) / schur;
            }
            if (v > s.max_pair) {
                s.max_pair = v;
                s.pair_t = static_cast<std::size_t>(i);
                s.pair_r = static_cast<std::size_t>(j);
                s.degenerate_pair = schur == 0.0;
            }
        }
    }
    return s;
}

double single_statistic(const DetectorBank& bank, HalfSpace half, std::size_t grid_index,
                        const cvec& y) {
    const MatchedOutputs q = bank.match(y);
    const auto i = static_cast<Eigen::Index>(grid_index);
    const cvec& out = half == HalfSpace::transmissive ? q.t : q.r;
    return std::norm(out[i]) / bank.cell(half).norms()[i];
}

DetectorBank::PairValue pair_statistic(const DetectorBank& bank, std::size_t i, std::size_t j,
                                       const cvec& y) {
    return bank.pair_value(bank.match(y), i, j);
}

Decision gic_decide(const DetectorBank& bank, const cvec& y) {
    return decide(bank.statistics(y), bank.grid(), bank.eta(), bank.carrier_hz());
}

// ---------------------------------------------------------------------------

bool is_time_division(const SlowTimeCodes& codes) {
    const Eigen::Index P = codes.transmissive.size();
    if (P < 2 || P % 2 != 0 || codes.reflective.size() != P) return false;
    const Eigen::Index h = P / 2;
    return codes.reflective.head(h).cwiseAbs2().maxCoeff() == 0.0 &&
           codes.transmissive.tail(h).cwiseAbs2().maxCoeff() == 0.0;
}

SequentialDetector::SequentialDetector(DopplerGrid grid, double eta, double carrier_hz,
                                       std::shared_ptr<const DisturbanceModel> model_t,
                                       std::shared_ptr<const DisturbanceModel> model_r,
                                       CellFilterBank cell_t, CellFilterBank cell_r)
    : grid_(std::move(grid)), eta_(eta), carrier_hz_(carrier_hz), model_t_(std::move(model_t)),
      model_r_(std::move(model_r)), cell_t_(std::move(cell_t)), cell_r_(std::move(cell_r)) {}

SequentialDetector SequentialDetector::build(const DisturbanceModel& disturbance,
                                             const RadarSetup& setup, const StarRisProfile& profile,
                                             const Direction& dir_t, const Direction& dir_r,
                                             DopplerGrid grid, double eta) {
    if (!is_time_division(profile.codes())) {
        throw ConfigError("the split binary tests require sequential (time-division) scanning");
    }
    if (!(eta >= 0)) throw ConfigError("GIC penalty must be >= 0");
    check_cell_directions(dir_t, dir_r);
    if (disturbance.pulses() != profile.pulses() || disturbance.rx_elements() != setup.rx.size()) {
        throw ConfigError("disturbance model does not match the profile/receiver dimensions");
    }
    const int half = profile.pulses() / 2;
    auto model_t = std::make_shared<const DisturbanceModel>(disturbance.restrict_pulses(0, half));
    auto model_r = std::make_shared<const DisturbanceModel>(disturbance.restrict_pulses(half, half));
    const double wl = setup.wavelength();
    CellFilterBank cell_t(*model_t, steering_vector(setup.rx, dir_t, wl).entries,
                          surface_temporal(setup, profile, dir_t).head(half), 0, setup.pri_s, grid);
    CellFilterBank cell_r(*model_r, steering_vector(setup.rx, dir_r, wl).entries,
                          surface_temporal(setup, profile, dir_r).tail(half), half, setup.pri_s, grid);
    return SequentialDetector(std::move(grid), eta, setup.carrier_hz, std::move(model_t),
                              std::move(model_r), std::move(cell_t), std::move(cell_r));
}

TrialStatistics SequentialDetector::statistics(const cvec& y) const {
    const Eigen::Index half_dim = model_t_->dimension();
    if (y.size() != half_dim + model_r_->dimension()) {
        throw ConfigError("observation length mismatch");
    }
    const cvec y_t = y.head(half_dim);
    const cvec y_r = y.tail(model_r_->dimension());
    const cvec q_t = cell_t_.match(y_t, model_t_->project(y_t));
    const cvec q_r = cell_r_.match(y_r, model_r_->project(y_r));

    TrialStatistics s;
    s.max_t = -1.0;
    s.max_r = -1.0;
    for (Eigen::Index i = 0; i < q_t.size(); ++i) {
        const double t = std::norm(q_t[i]) / cell_t_.norms()[i];
        const double r = std::norm(q_r[i]) / cell_r_.norms()[i];
        if (t > s.max_t) {
            s.max_t = t;
            s.arg_t = static_cast<std::size_t>(i);
        }
        if (r > s.max_r) {
            s.max_r = r;
            s.arg_r = static_cast<std::size_t>(i);
        }
    }
    s.max_pair = s.max_t + s.max_r;
    s.pair_t = s.arg_t;
    s.pair_r = s.arg_r;
    return s;
}

Decision sequential_decide(const SequentialDetector& detector, const cvec& y) {
    const TrialStatistics s = detector.statistics(y);
    const double eta = detector.eta();
    const bool target_t = s.max_t > eta;
    const bool target_r = s.max_r > eta;

    Decision d;
    d.hypothesis = target_t ? (target_r ? Hypothesis::H2 : Hypothesis::H1t)
                            : (target_r ? Hypothesis::H1r : Hypothesis::H0);
    d.objective = {0.0, s.max_t - eta, s.max_r - eta, s.max_pair - 2 * eta};
    fill_estimates(d, detector.grid(), s.arg_t, s.arg_r, detector.carrier_hz());
    return d;
}

}  // namespace starris
