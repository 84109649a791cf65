#include "rccap/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rccap {

void ArmaProcessSpec::validate() const {
    if (!(std::abs(phi) < 1.0))
        throw std::invalid_argument("ARMA spec: |phi| must be < 1, got " + std::to_string(phi));
    if (!(sigma > 0.0))
        throw std::invalid_argument("ARMA spec: sigma must be > 0, got " + std::to_string(sigma));
    if (!std::isfinite(theta)) throw std::invalid_argument("ARMA spec: theta must be finite");
}

AutocovarianceFunction::AutocovarianceFunction(LagFunction gamma_nonneg, LagFunction tail_bound)
    : gamma_(std::move(gamma_nonneg)), tail_(std::move(tail_bound)) {
    if (!(gamma_(0) > 0.0)) throw std::invalid_argument("autocovariance: gamma(0) must be > 0");
}

AutocovarianceFunction AutocovarianceFunction::from_table(std::vector<double> table) {
    if (table.empty()) throw std::invalid_argument("autocovariance table is empty");
    // Suffix sums of |gamma| give an exact tail.
    std::vector<double> suffix(table.size() + 1, 0.0);
    for (std::size_t i = table.size(); i-- > 0;) suffix[i] = suffix[i + 1] + std::abs(table[i]);
    auto shared = std::make_shared<const std::vector<double>>(std::move(table));
    auto tails = std::make_shared<const std::vector<double>>(std::move(suffix));
    return AutocovarianceFunction(
        [shared](std::int64_t h) {
            return static_cast<std::size_t>(h) < shared->size() ? (*shared)[h] : 0.0;
        },
        [tails](std::int64_t lag) {
            const auto i = static_cast<std::size_t>(lag) + 1;
            return i < tails->size() ? (*tails)[i] : 0.0;
        });
}

std::int64_t AutocovarianceFunction::lag_for_tail(double tol, std::int64_t cap) const {
    if (tail_(0) <= tol) return 0;
    // Exponential search then bisection; tail_bound is nonincreasing.
    std::int64_t hi = 1;
    while (hi < cap && tail_(hi) > tol) hi *= 2;
    hi = std::min(hi, cap);
    if (tail_(hi) > tol) return cap;
    std::int64_t lo = hi / 2;
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (tail_(mid) <= tol ? hi : lo) = mid;
    }
    return hi;
}

double AutocovarianceFunction::absolute_sum() const {
    const double g0 = gamma0();
    const std::int64_t j = lag_for_tail(1e-15 * g0);
    double s = 0.0;
    for (std::int64_t h = 1; h <= j; ++h) s += std::abs(gamma_(h));
    return g0 + 2.0 * (s + tail_(j));
}

std::vector<double> simulate_arma(const ArmaProcessSpec& spec, std::size_t length,
                                  std::size_t burn_in, Rng& rng) {
    spec.validate();
    if (length == 0) throw std::invalid_argument("simulate_arma: length must be >= 1");
    std::normal_distribution<double> innovation(0.0, spec.sigma);
    std::vector<double> out;
    out.reserve(length);
    double z = 0.0;
    double e_prev = 0.0;
    for (std::size_t t = 0; t < burn_in + length; ++t) {
        const double e = innovation(rng);
        z = spec.phi * z + e + spec.theta * e_prev;
        e_prev = e;
        if (t >= burn_in) out.push_back(z);
    }
    return out;
}

std::vector<double> simulate_arma(const ArmaProcessSpec& spec, std::size_t length,
                                  std::size_t burn_in, std::uint64_t seed) {
    Rng rng(seed);
    return simulate_arma(spec, length, burn_in, rng);
}

AutocovarianceFunction autocovariance(const ArmaProcessSpec& spec) {
    spec.validate();
    const double phi = spec.phi;
    const double theta = spec.theta;
    const double s2 = spec.sigma * spec.sigma;
    const double denom = 1.0 - phi * phi;
    const double g0 = s2 * (1.0 + 2.0 * phi * theta + theta * theta) / denom;
    const double g1 = s2 * (phi + theta) * (1.0 + phi * theta) / denom;
    const double aphi = std::abs(phi);
    return AutocovarianceFunction(
        [=](std::int64_t h) {
            if (h == 0) return g0;
            if (h == 1) return g1;
            return std::pow(phi, static_cast<double>(h - 1)) * g1;
        },
        // sum_{j > J} |phi|^{j-1} |g1| = |g1| |phi|^J / (1 - |phi|)
        [=](std::int64_t lag) {
            return std::abs(g1) * std::pow(aphi, static_cast<double>(lag)) / (1.0 - aphi);
        });
}

double spectral_density(const AutocovarianceFunction& acvf, double lambda, std::int64_t truncation) {
    if (!(lambda >= -std::numbers::pi && lambda <= std::numbers::pi))
        throw std::invalid_argument("spectral_density: lambda must lie in [-pi, pi]");
    if (truncation < 0) throw std::invalid_argument("spectral_density: truncation must be >= 0");
    // Terms beyond the point where the tail is negligible do not change the sum.
    const std::int64_t j = std::min(truncation, acvf.lag_for_tail(1e-17 * acvf.gamma0(), truncation));
    double s = acvf.gamma0();
    for (std::int64_t n = 1; n <= j; ++n) s += 2.0 * acvf(n) * std::cos(static_cast<double>(n) * lambda);
    return s / (2.0 * std::numbers::pi);
}

SpectralMaximum spectral_density_max(const AutocovarianceFunction& acvf, std::int64_t truncation,
                                     int grid) {
    const double pi = std::numbers::pi;
    auto f = [&](double l) { return spectral_density(acvf, l, truncation); };
    int best = 0;
    double best_val = f(0.0);
    for (int k = 1; k <= grid; ++k) {
        const double v = f(pi * k / grid);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    double lo = pi * std::max(best - 1, 0) / grid;
    double hi = pi * std::min(best + 1, grid) / grid;
    const double inv_golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - inv_golden * (hi - lo);
    double b = lo + inv_golden * (hi - lo);
    double fa = f(a), fb = f(b);
    for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_golden * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_golden * (hi - lo);
            fa = f(a);
        }
    }
    SpectralMaximum out{best_val, pi * best / grid};
    for (double cand : {a, b}) {
        const double v = f(cand);
        if (v > out.value) out = {v, cand};
    }
    return out;
}

ToeplitzBlock toeplitz_block(const AutocovarianceFunction& acvf, Eigen::Index order) {
    if (order < 1) throw std::invalid_argument("toeplitz_block: order must be >= 1");
    Vector g(order);
    for (Eigen::Index h = 0; h < order; ++h) g(h) = acvf(h);
    ToeplitzBlock block{Matrix(order, order)};
    for (Eigen::Index i = 0; i < order; ++i)
        for (Eigen::Index j = 0; j < order; ++j) block.entries(i, j) = g(std::abs(i - j));
    return block;
}

namespace {

double toeplitz_spectral_radius(const AutocovarianceFunction& acvf, Eigen::Index order) {
    const ToeplitzBlock h = toeplitz_block(acvf, order);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

SpectralRadiusLimit spectral_radius_limit(const AutocovarianceFunction& acvf, double rel_tol,
                                          Eigen::Index max_order) {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw std::invalid_argument("spectral_radius_limit: rel_tol must lie in (0, 1)");
    if (max_order < 1) throw std::invalid_argument("spectral_radius_limit: max_order must be >= 1");
    SpectralRadiusLimit out;
    out.ceiling = 2.0 * std::numbers::pi * spectral_density_max(acvf).value;
    Eigen::Index order = 1;
    double prev = toeplitz_spectral_radius(acvf, order);
    out.value = prev;
    out.order = order;
    while (order < max_order) {
        order = std::min(order * 2, max_order);
        const double cur = toeplitz_spectral_radius(acvf, order);
        out.value = cur;
        out.order = order;
        if (std::abs(cur - prev) < rel_tol * std::abs(cur)) {
            out.converged = true;
            break;
        }
        prev = cur;
    }
    return out;
}

GershgorinBound gershgorin_bound(const AutocovarianceFunction& acvf, int n, std::int64_t truncation) {
    if (n < 1) throw std::invalid_argument("gershgorin_bound: N must be >= 1");
    const double g0 = acvf.gamma0();
    GershgorinBound out;
    out.truncation = truncation > 0 ? truncation : acvf.lag_for_tail(1e-12 * g0);
    double s = 0.0;
    for (std::int64_t j = 1; j <= out.truncation; ++j) s += std::abs(acvf(j));
    out.value = n * (1.0 + 2.0 * s / g0);
    out.remainder = 2.0 * n * acvf.tail_bound(out.truncation) / g0;
    return out;
}

std::vector<double> empirical_autocovariance(std::span<const double> series, std::size_t max_lag) {
    const std::size_t t = series.size();
    if (max_lag >= t)
        throw std::invalid_argument("empirical_autocovariance: max_lag must be < series length");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(t);
    std::vector<double> centered(series.begin(), series.end());
    for (double& v : centered) v -= mean;
    std::vector<double> out(max_lag + 1, 0.0);
    for (std::size_t h = 0; h <= max_lag; ++h) {
        double s = 0.0;
        for (std::size_t i = 0; i + h < t; ++i) s += centered[i] * centered[i + h];
        out[h] = s / static_cast<double>(t);
    }
    return out;
}

}  // namespace rccap
