#pragma once

// Stationary scalar input processes: ARMA(1,1) simulation, exact second-order
// analytics and the Toeplitz lag-covariance machinery behind the capacity
// bounds.

#include "rccap/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rccap {

/// ARMA(1,1) input model Z_t = phi Z_{t-1} + e_t + theta e_{t-1},
/// e_t ~ N(0, sigma^2). AR(1), MA(1) and white noise are the degenerate cases.
struct ArmaProcessSpec {
    double phi = 0.0;
    double theta = 0.0;
    double sigma = 1.0;

    /// Throws std::invalid_argument unless |phi| < 1 and sigma > 0.
    void validate() const;

    bool is_white_noise() const { return phi == 0.0 && theta == 0.0; }

    static ArmaProcessSpec white_noise(double sigma = 1.0) { return {0.0, 0.0, sigma}; }
    static ArmaProcessSpec ar1(double phi, double sigma = 1.0) { return {phi, 0.0, sigma}; }
    static ArmaProcessSpec ma1(double theta, double sigma = 1.0) { return {0.0, theta, sigma}; }
};

/// Scalar autocovariance function gamma(h) = Cov(Z_t, Z_{t+h}) together with a
/// certified bound on its tail sum.
class AutocovarianceFunction {
public:
    using LagFunction = std::function<double(std::int64_t)>;

    /// `gamma_nonneg` is evaluated on h >= 0 only; `tail_bound(J)` must bound
    /// sum_{j > J} |gamma(j)| from above for every J >= 0.
    AutocovarianceFunction(LagFunction gamma_nonneg, LagFunction tail_bound);

    /// Finite-support autocovariance: gamma(h) = table[|h|] for |h| < size, else 0.
    static AutocovarianceFunction from_table(std::vector<double> table);

    double operator()(std::int64_t h) const { return gamma_(h < 0 ? -h : h); }
    double gamma0() const { return gamma_(0); }
    double tail_bound(std::int64_t lag) const { return tail_(lag < 0 ? 0 : lag); }

    /// Smallest J with tail_bound(J) <= tol, capped at `cap`.
    std::int64_t lag_for_tail(double tol, std::int64_t cap = 1'000'000) const;

    /// sum_{n in Z} |gamma(n)| (truncated where the certified tail drops below
    /// 1e-15 gamma(0), remainder added).
    double absolute_sum() const;

private:
    LagFunction gamma_;
    LagFunction tail_;
};

/// Simulates Z_1..Z_length after discarding `burn_in` steps started from rest.
/// Deterministic for a fixed seed.
std::vector<double> simulate_arma(const ArmaProcessSpec& spec, std::size_t length,
                                  std::size_t burn_in, std::uint64_t seed);
std::vector<double> simulate_arma(const ArmaProcessSpec& spec, std::size_t length,
                                  std::size_t burn_in, Rng& rng);

/// Closed-form ARMA(1,1) autocovariance.
AutocovarianceFunction autocovariance(const ArmaProcessSpec& spec);

/// f(lambda) = (1/2pi) sum_{|n| <= truncation} e^{-i n lambda} gamma(n).
/// Throws std::invalid_argument for lambda outside [-pi, pi].
double spectral_density(const AutocovarianceFunction& acvf, double lambda,
                        std::int64_t truncation = 10'000);

/// M_f = max over [-pi, pi] of the spectral density: grid search on [0, pi]
/// followed by golden-section refinement of the best bracket.
struct SpectralMaximum {
    double value = 0.0;
    double argmax = 0.0;
};
SpectralMaximum spectral_density_max(const AutocovarianceFunction& acvf,
                                     std::int64_t truncation = 10'000, int grid = 1024);

/// Symmetric Toeplitz lag-covariance block H_ij = gamma(|i - j|).
struct ToeplitzBlock {
    Matrix entries;

    Eigen::Index order() const { return entries.rows(); }
    /// lambda_max / lambda_min (inf when singular); diagnostic for near-singular
    /// blocks such as MA(1) with |theta| close to 1.
    double condition_number() const { return condition_number_symmetric(entries); }
};

ToeplitzBlock toeplitz_block(const AutocovarianceFunction& acvf, Eigen::Index order);

/// rho(H) = lim_L rho(H^L) approximated by doubling the order until successive
/// values agree to `rel_tol`. The sequence is nondecreasing by interlacing and
/// bounded by the analytic ceiling 2 pi M_f.
struct SpectralRadiusLimit {
    double value = 0.0;
    Eigen::Index order = 0;
    bool converged = false;
    double ceiling = 0.0;  // 2 pi M_f
};
SpectralRadiusLimit spectral_radius_limit(const AutocovarianceFunction& acvf,
                                          double rel_tol = 1e-4,
                                          Eigen::Index max_order = 1024);

/// N (1 + (2/gamma(0)) sum_{j=1}^{truncation} |gamma(j)|) with the certified
/// remainder 2 N tail_bound(truncation) / gamma(0) reported separately.
/// A non-positive truncation selects the smallest J whose tail is below
/// 1e-12 gamma(0).
struct GershgorinBound {
    double value = 0.0;
    double remainder = 0.0;
    std::int64_t truncation = 0;

    double upper() const { return value + remainder; }
};
GershgorinBound gershgorin_bound(const AutocovarianceFunction& acvf, int n,
                                 std::int64_t truncation = 0);

/// Biased (1/T) sample autocovariance for lags 0..max_lag about the sample mean.
/// Throws std::invalid_argument when max_lag >= series.size().
std::vector<double> empirical_autocovariance(std::span<const double> series,
                                             std::size_t max_lag);

}  // namespace rccap
