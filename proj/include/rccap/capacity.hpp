#pragma once

// Memory and forecasting capacities of systems with the echo state property:
// empirical estimation from a simulated run, the universal upper bounds in
// terms of the input autocovariance, and report validation.
//
// Sign convention: memory lags are tau = 0, -1, ..., -tau_max (the current
// state reconstructing Z_{t+tau}); forecasting horizons are h = 1..h_max (the
// current state predicting Z_{t+h}).

#include "rccap/inputs.hpp"
#include "rccap/systems.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rccap {

enum class CapacityMode { memory, forecast };

enum class EstimatorKind { empirical, analytic_linear, rank };

std::string to_string(EstimatorKind kind);

struct CapacityReport {
    std::vector<double> mc_tau;  // mc_tau[k] is MC at lag tau = -k
    std::vector<double> fc_h;    // fc_h[k] is FC at horizon h = k + 1
    double mc_total = 0.0;
    double fc_total = 0.0;
    /// Sum of the last 10 included terms of each series: a heuristic for the
    /// mass left out by the truncation. Never added to the totals.
    double truncation_tail_estimate = 0.0;
    double fc_truncation_tail_estimate = 0.0;
    EstimatorKind estimator = EstimatorKind::empirical;
    std::vector<std::string> flags;

    /// Per-lag range tolerance: 0.02 for empirical estimates, 1e-8 otherwise.
    double tolerance() const { return estimator == EstimatorKind::empirical ? 0.02 : 1e-8; }
    /// Recomputes totals and tail estimates from the per-lag series.
    void finalize();
};

struct BoundsReport {
    int n = 0;
    double gamma0 = 0.0;
    double rho_bound = 0.0;       // N rho(H) / gamma(0)
    double spectral_bound = 0.0;  // 2 pi N M_f / gamma(0)
    double gershgorin = 0.0;      // N (1 + (2/gamma(0)) sum_j |gamma(j)|), certified remainder included
    Eigen::Index rho_order = 0;
    bool rho_converged = false;
    std::vector<std::string> flags;
};

/// Options shared by the empirical estimators.
struct EmpiricalOptions {
    /// Tikhonov term added to the sample state covariance. Zero selects a
    /// rank-revealing least-squares solve and raises a conditioning flag when
    /// the sample covariance has condition number above 1e12.
    double ridge = 0.0;
    /// Use the adjusted coefficient of determination
    /// 1 - (1 - R^2)(n - 1)/(n - r - 1) instead of the plug-in R^2. The plug-in
    /// value carries an upward bias of about N/T per lag, which adds up to
    /// roughly 0.4 over 250 lags at N = 15, T = 10^4. Adjusted values can dip
    /// slightly below zero.
    bool adjust_for_dof = true;
};

struct LagCapacity {
    double value = 0.0;
    double condition = 1.0;  // condition number of the sample state covariance
    bool ill_conditioned = false;
};

/// Cov(Z_{t+tau}, X_t) (G + ridge I)^{-1} Cov(X_t, Z_{t+tau}) / Var(Z) from
/// sample moments over the aligned overlap. Memory mode takes tau <= 0, forecast
/// mode a horizon tau >= 1 (target Z_{t+tau}). Requires |tau| < T/2.
LagCapacity capacity_tau_empirical(const Matrix& states, std::span<const double> inputs, int tau,
                                   CapacityMode mode, const EmpiricalOptions& options = {});

/// Per-lag capacities on the common window t in [tau_max, T - h_max) so that a
/// single factorization of the state block serves every lag.
CapacityReport empirical_capacity_report(const Matrix& states, std::span<const double> inputs,
                                         int tau_max, int h_max,
                                         const EmpiricalOptions& options = {});

struct SimulationOptions {
    std::size_t washout = 1000;  // filter washout
    std::size_t burn_in = 1000;  // ARMA burn-in
};

/// Simulates one input path of `length` retained steps, runs the filter and
/// estimates MC over tau = 0..-tau_max and FC over h = 1..tau_max.
CapacityReport total_capacity_empirical(const StateSystem& sys, const ArmaProcessSpec& input,
                                        int tau_max, std::size_t length, std::uint64_t seed,
                                        const EmpiricalOptions& options = {},
                                        const SimulationOptions& sim = {});

struct BoundsOptions {
    double rel_tol = 1e-4;
    Eigen::Index max_order = 1024;
};

/// The three capacity bounds for an N-dimensional state space; flags
/// non-convergence of rho(H) and any break of rho <= spectral <= gershgorin.
BoundsReport theoretical_bounds(const AutocovarianceFunction& acvf, int n,
                                const BoundsOptions& options = {});

struct Violation {
    enum class Kind { memory_range, forecast_range, memory_total, forecast_total };
    Kind kind;
    std::optional<int> lag;  // tau for memory, h for forecasts
    std::string message;
};

/// Checks per-lag ranges and totals against every bound. Slack on totals is
/// 0.02 per summed lag for empirical reports and 1e-8 otherwise.
std::vector<Violation> validate_report(const CapacityReport& report, const BoundsReport& bounds);

}  // namespace rccap
