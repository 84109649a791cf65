#include "rccap/inputs.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace rccap;

namespace {

// Independent closed forms used as oracles.
double ar1_gamma(double phi, int h) { return std::pow(phi, std::abs(h)) / (1.0 - phi * phi); }

double ar1_density(double phi, double lambda) {
    const double re = 1.0 - phi * std::cos(lambda);
    const double im = phi * std::sin(lambda);
    return 1.0 / (2.0 * std::numbers::pi * (re * re + im * im));
}

double lag_correlation(const std::vector<double>& z, int h) {
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < z.size(); ++t) {
        den += (z[t] - mean) * (z[t] - mean);
        if (t + h < z.size()) num += (z[t] - mean) * (z[t + h] - mean);
    }
    return num / den;
}

}  // namespace

TEST_CASE("arma spec validation") {
    CHECK_NOTHROW(ArmaProcessSpec::ar1(0.99).validate());
    CHECK_THROWS_AS(ArmaProcessSpec::ar1(1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ArmaProcessSpec::ar1(-1.2).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ArmaProcessSpec{0.1, 0.0, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ArmaProcessSpec{0.1, 0.0, -1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ArmaProcessSpec{std::nan(""), 0.0, 1.0}).validate(), std::invalid_argument);
    CHECK(ArmaProcessSpec::white_noise().is_white_noise());
    CHECK_FALSE(ArmaProcessSpec::ma1(0.2).is_white_noise());
}

TEST_CASE("simulate_arma") {
    SUBCASE("white noise has no lag-1 correlation") {
        const auto z = simulate_arma(ArmaProcessSpec::white_noise(), 100'000, 1000, 7);
        CHECK(std::abs(lag_correlation(z, 1)) <= 0.02);
    }
    SUBCASE("AR(1) lag-1 correlation matches phi") {
        const auto z = simulate_arma(ArmaProcessSpec::ar1(0.5), 100'000, 1000, 11);
        CHECK(std::abs(lag_correlation(z, 1) - 0.5) <= 0.03);
    }
    SUBCASE("deterministic per seed") {
        const ArmaProcessSpec spec{0.3, 0.4, 2.0};
        CHECK(simulate_arma(spec, 5000, 100, 42) == simulate_arma(spec, 5000, 100, 42));
        CHECK(simulate_arma(spec, 5000, 100, 42) != simulate_arma(spec, 5000, 100, 43));
    }
    SUBCASE("length and zero burn-in") {
        CHECK(simulate_arma(ArmaProcessSpec::ar1(0.2), 17, 0, 1).size() == 17);
        CHECK_THROWS_AS(simulate_arma(ArmaProcessSpec::ar1(0.2), 0, 0, 1), std::invalid_argument);
    }
    SUBCASE("sigma scales the path") {
        const auto a = simulate_arma(ArmaProcessSpec::ar1(0.4, 1.0), 100, 10, 5);
        const auto b = simulate_arma(ArmaProcessSpec::ar1(0.4, 3.0), 100, 10, 5);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(3.0 * a[i]));
    }
    SUBCASE("rejects invalid spec") {
        CHECK_THROWS_AS(simulate_arma(ArmaProcessSpec::ar1(1.5), 10, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("autocovariance closed forms") {
    SUBCASE("white noise") {
        const auto g = autocovariance(ArmaProcessSpec::white_noise());
        CHECK(g(0) == 1.0);
        for (int h = 1; h < 10; ++h) CHECK(g(h) == 0.0);
        CHECK(g.tail_bound(0) == 0.0);
    }
    SUBCASE("AR(1) phi = 0.5") {
        const auto g = autocovariance(ArmaProcessSpec::ar1(0.5));
        CHECK(g(0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
        CHECK(g(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
        CHECK(g(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(g(-2) == g(2));
        for (int h = 0; h < 30; ++h) CHECK(g(h) == doctest::Approx(ar1_gamma(0.5, h)).epsilon(1e-12));
    }
    SUBCASE("MA(1) theta = 0.5") {
        const auto g = autocovariance(ArmaProcessSpec::ma1(0.5));
        CHECK(g(0) == doctest::Approx(1.25));
        CHECK(g(1) == doctest::Approx(0.5));
        CHECK(g(2) == 0.0);
        CHECK(g(-1) == doctest::Approx(0.5));
    }
    SUBCASE("simulation oracle, 10^6 steps, within 1%") {
        for (const ArmaProcessSpec spec : {ArmaProcessSpec::ar1(0.5), ArmaProcessSpec::ma1(0.5)}) {
            const auto g = autocovariance(spec);
            const auto z = simulate_arma(spec, 1'000'000, 1000, 2024);
            const auto est = empirical_autocovariance(z, 2);
            CHECK(est[0] == doctest::Approx(g(0)).epsilon(0.01));
            CHECK(est[1] == doctest::Approx(g(1)).epsilon(0.01));
            CHECK(std::abs(est[2] - g(2)) <= 0.01 * g(0));
        }
    }
    SUBCASE("ARMA(1,1) against brute-force MA(infinity) expansion") {
        const double phi = 0.6, theta = -0.3, sigma = 1.5;
        const auto g = autocovariance({phi, theta, sigma});
        // psi_0 = 1, psi_j = phi^{j-1}(phi + theta)
        auto psi = [&](int j) { return j == 0 ? 1.0 : std::pow(phi, j - 1) * (phi + theta); };
        for (int h = 0; h < 6; ++h) {
            double s = 0.0;
            for (int j = 0; j < 400; ++j) s += psi(j) * psi(j + h);
            CHECK(g(h) == doctest::Approx(sigma * sigma * s).epsilon(1e-12));
        }
    }
    SUBCASE("tail certificates and absolute sums") {
        const auto g = autocovariance({0.7, 0.2, 1.0});
        for (int j : {0, 1, 5, 40}) {
            double direct = 0.0;
            for (int k = j + 1; k < 3000; ++k) direct += std::abs(g(k));
            CHECK(g.tail_bound(j) >= direct * (1 - 1e-12));
            CHECK(g.tail_bound(j) <= direct * (1 + 1e-9) + 1e-300);
        }
        double full = g(0);
        for (int k = 1; k < 3000; ++k) full += 2 * std::abs(g(k));
        CHECK(g.absolute_sum() == doctest::Approx(full).epsilon(1e-12));
        const auto j = g.lag_for_tail(1e-9);
        CHECK(g.tail_bound(j) <= 1e-9);
        CHECK(g.tail_bound(j - 1) > 1e-9);
    }
    SUBCASE("from_table") {
        const auto g = AutocovarianceFunction::from_table({2.0, -0.5, 0.25});
        CHECK(g(0) == 2.0);
        CHECK(g(-1) == -0.5);
        CHECK(g(2) == 0.25);
        CHECK(g(3) == 0.0);
        CHECK(g.tail_bound(0) == doctest::Approx(0.75));
        CHECK(g.tail_bound(2) == 0.0);
        CHECK(g.absolute_sum() == doctest::Approx(3.5));
    }
}

TEST_CASE("spectral density") {
    const auto white = autocovariance(ArmaProcessSpec::white_noise());
    for (double l : {-3.0, -1.0, 0.0, 0.5, std::numbers::pi})
        CHECK(spectral_density(white, l) == doctest::Approx(1.0 / (2 * std::numbers::pi)));

    const auto ar = autocovariance(ArmaProcessSpec::ar1(0.5));
    CHECK(spectral_density(ar, 0.0) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-6));
    for (double l : {0.3, 1.0, 2.5}) CHECK(std::abs(spectral_density(ar, l) - ar1_density(0.5, l)) <= 1e-6);

    SUBCASE("integral over [-pi, pi] returns gamma(0)") {
        const auto g = autocovariance({0.4, 0.3, 1.0});
        const int m = 4000;
        double integral = 0.0;  // composite Simpson
        for (int k = 0; k <= m; ++k) {
            const double l = -std::numbers::pi + 2 * std::numbers::pi * k / m;
            const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            integral += w * spectral_density(g, l);
        }
        integral *= (2 * std::numbers::pi / m) / 3.0;
        CHECK(std::abs(integral - g(0)) <= 1e-6);
    }
    SUBCASE("domain") {
        CHECK_THROWS_AS(spectral_density(ar, 3.2), std::invalid_argument);
        CHECK_THROWS_AS(spectral_density(ar, -4.0), std::invalid_argument);
    }
    SUBCASE("maximum") {
        const auto m = spectral_density_max(ar);
        CHECK(m.value == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-6));
        CHECK(std::abs(m.argmax) <= 1e-6);
        // phi < 0 moves the peak to pi
        const auto neg = spectral_density_max(autocovariance(ArmaProcessSpec::ar1(-0.5)));
        CHECK(neg.value == doctest::Approx(ar1_density(-0.5, std::numbers::pi)).epsilon(1e-6));
        CHECK(std::abs(std::abs(neg.argmax) - std::numbers::pi) <= 1e-5);
    }
}

TEST_CASE("toeplitz blocks") {
    const auto white = autocovariance(ArmaProcessSpec::white_noise(2.0));
    CHECK(toeplitz_block(white, 3).entries.isApprox(4.0 * Matrix::Identity(3, 3)));

    const auto ar = autocovariance(ArmaProcessSpec::ar1(0.5));
    Matrix expected(2, 2);
    expected << 4.0 / 3, 2.0 / 3, 2.0 / 3, 4.0 / 3;
    CHECK(toeplitz_block(ar, 2).entries.isApprox(expected, 1e-14));

    for (int k = 1; k < 12; ++k) {
        const Matrix small = toeplitz_block(ar, k).entries;
        const Matrix big = toeplitz_block(ar, k + 1).entries;
        CHECK(big.topLeftCorner(k, k) == small);
    }
    SUBCASE("MA(1) with theta near one is badly conditioned") {
        const double good = toeplitz_block(autocovariance(ArmaProcessSpec::ma1(0.5)), 200).condition_number();
        const double bad = toeplitz_block(autocovariance(ArmaProcessSpec::ma1(0.999)), 200).condition_number();
        CHECK(good < 10.0);
        CHECK(bad > 1e3);
        CHECK(toeplitz_block(autocovariance(ArmaProcessSpec::ma1(1.0)), 200).condition_number() > bad);
    }
}

TEST_CASE("spectral radius limit") {
    const auto white = autocovariance(ArmaProcessSpec::white_noise());
    const auto w = spectral_radius_limit(white);
    CHECK(w.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.converged);

    const auto ar = autocovariance(ArmaProcessSpec::ar1(0.5));
    // dense oracle at order 500
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(toeplitz_block(ar, 500).entries).eigenvalues();
    CHECK(ev.maxCoeff() >= 3.9);
    CHECK(ev.maxCoeff() < 4.0);

    const auto lim = spectral_radius_limit(ar, 1e-6, 1024);
    CHECK(lim.value >= 3.9);
    CHECK(lim.value <= lim.ceiling + 1e-6 * lim.ceiling / (2 * std::numbers::pi));
    CHECK(lim.ceiling == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(lim.order <= 1024);
}

TEST_CASE("gershgorin bound") {
    CHECK(gershgorin_bound(autocovariance(ArmaProcessSpec::white_noise()), 15).upper() == doctest::Approx(15.0));
    CHECK(gershgorin_bound(autocovariance(ArmaProcessSpec::ar1(0.5)), 15).upper() ==
          doctest::Approx(45.0).epsilon(1e-9));
    CHECK(gershgorin_bound(autocovariance(ArmaProcessSpec::ma1(0.5)), 15).upper() ==
          doctest::Approx(27.0).epsilon(1e-9));
    SUBCASE("explicit truncation reports the remainder") {
        const auto g = gershgorin_bound(autocovariance(ArmaProcessSpec::ar1(0.5)), 1, 3);
        CHECK(g.truncation == 3);
        CHECK(g.remainder > 0.0);
        CHECK(g.upper() == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(g.value < 3.0);
    }
    SUBCASE("negative correlations") {
        // N (1 + 2 sum |phi|^j) = N (1 + |phi|) / (1 - |phi|)
        CHECK(gershgorin_bound(autocovariance(ArmaProcessSpec::ar1(-0.5)), 2).upper() ==
              doctest::Approx(6.0).epsilon(1e-9));
    }
}

TEST_CASE("empirical autocovariance") {
    const std::vector<double> constant(100, 3.0);
    for (double v : empirical_autocovariance(constant, 5)) CHECK(v == 0.0);

    std::vector<double> alt(1000);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
    const auto a = empirical_autocovariance(alt, 1);
    CHECK(a[0] == doctest::Approx(1.0));
    CHECK(a[1] == doctest::Approx(-999.0 / 1000.0));

    const auto z = simulate_arma(ArmaProcessSpec::ar1(0.5), 500'000, 1000, 9);
    CHECK(empirical_autocovariance(z, 1)[1] == doctest::Approx(2.0 / 3.0).epsilon(0.03));

    CHECK_THROWS_AS(empirical_autocovariance(constant, 100), std::invalid_argument);
}
