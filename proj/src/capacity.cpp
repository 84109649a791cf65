#include "rccap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace rccap {

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::empirical: return "empirical";
        case EstimatorKind::analytic_linear: return "analytic-linear";
        case EstimatorKind::rank: return "rank";
    }
    return "unknown";
}

void CapacityReport::finalize() {
    auto total = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    };
    auto tail = [](const std::vector<double>& v) {
        double s = 0.0;
        const std::size_t from = v.size() > 10 ? v.size() - 10 : 0;
        for (std::size_t i = from; i < v.size(); ++i) s += v[i];
        return s;
    };
    mc_total = total(mc_tau);
    fc_total = total(fc_h);
    truncation_tail_estimate = tail(mc_tau);
    fc_truncation_tail_estimate = tail(fc_h);
}

namespace {

/// Least-squares projection of centered targets onto the span of a centered
/// block of states. One factorization, many targets.
class StateProjector {
public:
    StateProjector(const Eigen::Ref<const Matrix>& block, const EmpiricalOptions& options)
        : options_(options), rows_(block.rows()) {
        centered_ = block.rowwise() - block.colwise().mean();
        const auto n = centered_.cols();
        if (options_.ridge > 0.0) {
            gram_ = centered_.transpose() * centered_ / static_cast<double>(rows_);
            condition_ = condition_number_symmetric(gram_);
            gram_.diagonal().array() += options_.ridge;
            llt_.compute(gram_);
            rank_ = n;
        } else {
            qr_ = Eigen::ColPivHouseholderQR<Matrix>(centered_.rows(), n);
            qr_.setThreshold(1e-13);
            qr_.compute(centered_);
            rank_ = qr_.rank();
            if (n > 0) {
                const Matrix r = qr_.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
                Eigen::JacobiSVD<Matrix> svd(r);
                const Vector& sv = svd.singularValues();
                const double lo = sv(n - 1);
                condition_ = lo > 0.0 ? std::pow(sv(0) / lo, 2)
                                      : std::numeric_limits<double>::infinity();
            }
        }
    }

    Eigen::Index rank() const { return rank_; }
    double condition() const { return condition_; }
    bool ill_conditioned() const { return options_.ridge == 0.0 && condition_ > 1e12; }

    /// Fraction of the target's sample variance explained by the best affine
    /// readout of the states.
    double explained(const Eigen::Ref<const Vector>& target) const {
        const Vector y = target.array() - target.mean();
        const double yy = y.squaredNorm();
        if (!(yy > 0.0)) return 0.0;
        double r2;
        if (options_.ridge > 0.0) {
            const double n = static_cast<double>(rows_);
            const Vector c = centered_.transpose() * y / n;
            r2 = c.dot(llt_.solve(c)) / (yy / n);
        } else {
            const Vector w = qr_.householderQ().adjoint() * y;
            r2 = w.head(rank_).squaredNorm() / yy;
        }
        if (options_.adjust_for_dof) {
            const double n = static_cast<double>(rows_);
            const double k = static_cast<double>(rank_);
            r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - k - 1.0);
        }
        return r2;
    }

private:
    EmpiricalOptions options_;
    Eigen::Index rows_;
    Matrix centered_;
    Matrix gram_;
    Eigen::LLT<Matrix> llt_;
    Eigen::ColPivHouseholderQR<Matrix> qr_;
    Eigen::Index rank_ = 0;
    double condition_ = 1.0;
};

Eigen::Map<const Vector> as_vector(std::span<const double> s, std::size_t offset, Eigen::Index count) {
    return Eigen::Map<const Vector>(s.data() + offset, count);
}

void check_run_shape(const Matrix& states, std::span<const double> inputs) {
    if (static_cast<std::size_t>(states.rows()) != inputs.size())
        throw std::invalid_argument("capacity: states and inputs must have the same length");
    if (states.cols() < 1) throw std::invalid_argument("capacity: states must have at least one column");
}

std::string condition_flag(double condition) {
    std::ostringstream os;
    os << "ill_conditioned_state_covariance(kappa=" << condition << ")";
    return os.str();
}

}  // namespace

LagCapacity capacity_tau_empirical(const Matrix& states, std::span<const double> inputs, int tau,
                                   CapacityMode mode, const EmpiricalOptions& options) {
    check_run_shape(states, inputs);
    const auto t_len = static_cast<Eigen::Index>(inputs.size());
    if (mode == CapacityMode::memory && tau > 0)
        throw std::invalid_argument("capacity_tau_empirical: memory lags must satisfy tau <= 0");
    if (mode == CapacityMode::forecast && tau < 1)
        throw std::invalid_argument("capacity_tau_empirical: forecast horizons must satisfy tau >= 1");
    const Eigen::Index shift = std::abs(tau);
    if (2 * shift >= t_len) throw std::invalid_argument("capacity_tau_empirical: |tau| must be < T/2");

    const Eigen::Index count = t_len - shift;
    // Memory: X_t for t >= shift against Z_{t - shift}. Forecast: X_t for
    // t < T - shift against Z_{t + shift}.
    const Eigen::Index state_from = mode == CapacityMode::memory ? shift : 0;
    const std::size_t input_from = mode == CapacityMode::memory ? 0 : static_cast<std::size_t>(shift);
    StateProjector proj(states.middleRows(state_from, count), options);
    LagCapacity out;
    out.value = proj.explained(as_vector(inputs, input_from, count));
    out.condition = proj.condition();
    out.ill_conditioned = proj.ill_conditioned();
    return out;
}

CapacityReport empirical_capacity_report(const Matrix& states, std::span<const double> inputs,
                                         int tau_max, int h_max, const EmpiricalOptions& options) {
    check_run_shape(states, inputs);
    if (tau_max < 0 || h_max < 0)
        throw std::invalid_argument("empirical_capacity_report: lag ranges must be nonnegative");
    const auto t_len = static_cast<Eigen::Index>(inputs.size());
    const Eigen::Index count = t_len - tau_max - h_max;
    if (count < states.cols() + 2)
        throw std::invalid_argument("empirical_capacity_report: run too short for the lag range");

    StateProjector proj(states.middleRows(tau_max, count), options);
    CapacityReport report;
    report.estimator = EstimatorKind::empirical;
    report.mc_tau.resize(static_cast<std::size_t>(tau_max) + 1);
    report.fc_h.resize(static_cast<std::size_t>(h_max));
    for (int k = 0; k <= tau_max; ++k)
        report.mc_tau[k] = proj.explained(as_vector(inputs, static_cast<std::size_t>(tau_max - k), count));
    for (int h = 1; h <= h_max; ++h)
        report.fc_h[h - 1] = proj.explained(as_vector(inputs, static_cast<std::size_t>(tau_max + h), count));
    if (proj.ill_conditioned()) report.flags.push_back(condition_flag(proj.condition()));
    if (proj.rank() < states.cols())
        report.flags.push_back("rank_deficient_states(" + std::to_string(proj.rank()) + "/" +
                               std::to_string(states.cols()) + ")");
    report.finalize();
    return report;
}

CapacityReport total_capacity_empirical(const StateSystem& sys, const ArmaProcessSpec& input,
                                        int tau_max, std::size_t length, std::uint64_t seed,
                                        const EmpiricalOptions& options, const SimulationOptions& sim) {
    if (tau_max < 1) throw std::invalid_argument("total_capacity_empirical: tau_max must be >= 1");
    if (length < 4 * static_cast<std::size_t>(tau_max))
        throw std::invalid_argument("total_capacity_empirical: length must be >= 4 tau_max");
    const std::vector<double> z = simulate_arma(input, length + sim.washout, sim.burn_in, seed);
    const FilterRun run = run_filter(sys, z, sim.washout);
    return empirical_capacity_report(run.states, run.inputs, tau_max, tau_max, options);
}

BoundsReport theoretical_bounds(const AutocovarianceFunction& acvf, int n, const BoundsOptions& options) {
    if (n < 1) throw std::invalid_argument("theoretical_bounds: N must be >= 1");
    BoundsReport out;
    out.n = n;
    out.gamma0 = acvf.gamma0();
    const SpectralRadiusLimit rho = spectral_radius_limit(acvf, options.rel_tol, options.max_order);
    out.rho_bound = n * rho.value / out.gamma0;
    out.rho_order = rho.order;
    out.rho_converged = rho.converged;
    out.spectral_bound = n * rho.ceiling / out.gamma0;
    out.gershgorin = gershgorin_bound(acvf, n).upper();
    if (!rho.converged)
        out.flags.push_back("rho_not_converged(order=" + std::to_string(rho.order) + ")");
    if (out.rho_bound > out.spectral_bound * (1.0 + 1e-8) ||
        out.spectral_bound > out.gershgorin * (1.0 + 1e-8))
        out.flags.push_back("bound_chain_violated");
    return out;
}

std::vector<Violation> validate_report(const CapacityReport& report, const BoundsReport& bounds) {
    std::vector<Violation> out;
    const double tol = report.tolerance();
    for (std::size_t k = 0; k < report.mc_tau.size(); ++k) {
        const double v = report.mc_tau[k];
        if (!(v >= -tol && v <= 1.0 + tol)) {
            const int tau = -static_cast<int>(k);
            std::ostringstream os;
            os << "MC at tau=" << tau << " is " << v << ", outside [0, 1]";
            out.push_back({Violation::Kind::memory_range, tau, os.str()});
        }
    }
    for (std::size_t k = 0; k < report.fc_h.size(); ++k) {
        const double v = report.fc_h[k];
        if (!(v >= -tol && v <= 1.0 + tol)) {
            const int h = static_cast<int>(k) + 1;
            std::ostringstream os;
            os << "FC at h=" << h << " is " << v << ", outside [0, 1]";
            out.push_back({Violation::Kind::forecast_range, h, os.str()});
        }
    }
    const bool empirical = report.estimator == EstimatorKind::empirical;
    const std::pair<const char*, double> named[] = {{"rho bound", bounds.rho_bound},
                                                    {"spectral bound", bounds.spectral_bound},
                                                    {"gershgorin bound", bounds.gershgorin}};
    auto check_total = [&](double total, std::size_t count, Violation::Kind kind, const char* label) {
        const double slack = empirical ? 0.02 * static_cast<double>(count) : 1e-8;
        if (!(total >= -slack)) {
            std::ostringstream os;
            os << label << " total " << total << " is negative";
            out.push_back({kind, std::nullopt, os.str()});
        }
        for (const auto& [name, bound] : named) {
            if (!(total <= bound + slack)) {
                std::ostringstream os;
                os << label << " total " << total << " exceeds " << name << " " << bound;
                out.push_back({kind, std::nullopt, os.str()});
            }
        }
    };
    check_total(report.mc_total, report.mc_tau.size(), Violation::Kind::memory_total, "MC");
    check_total(report.fc_total, report.fc_h.size(), Violation::Kind::forecast_total, "FC");
    return out;
}

}  // namespace rccap
