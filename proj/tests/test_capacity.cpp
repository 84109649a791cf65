#include "rccap/capacity.hpp"
#include "rccap/experiment.hpp"
#include "rccap/lincap.hpp"
#include "rccap/properties.hpp"

#include <doctest.h>

#include <cmath>

using namespace rccap;

namespace {

FilterRun scalar_run(double a, const ArmaProcessSpec& spec, std::size_t len, std::uint64_t seed) {
    const LinearStateSystem sys(Matrix::Constant(1, 1, a), Vector::Ones(1));
    return run_filter(sys, simulate_arma(spec, len + 500, 500, seed), 500);
}

}  // namespace

TEST_CASE("per-lag empirical capacity") {
    const FilterRun run = scalar_run(0.0, ArmaProcessSpec::white_noise(), 100'000, 3);
    SUBCASE("X_t = Z_t recovers the current input and nothing else") {
        CHECK(capacity_tau_empirical(run.states, run.inputs, 0, CapacityMode::memory).value ==
              doctest::Approx(1.0).epsilon(0.02));
        CHECK(std::abs(capacity_tau_empirical(run.states, run.inputs, -1, CapacityMode::memory).value) <= 0.02);
        CHECK(std::abs(capacity_tau_empirical(run.states, run.inputs, 1, CapacityMode::forecast).value) <= 0.02);
    }
    SUBCASE("plug-in R^2 sits above the adjusted value") {
        EmpiricalOptions raw;
        raw.adjust_for_dof = false;
        const double plug = capacity_tau_empirical(run.states, run.inputs, -3, CapacityMode::memory, raw).value;
        const double adj = capacity_tau_empirical(run.states, run.inputs, -3, CapacityMode::memory).value;
        CHECK(plug >= 0.0);
        CHECK(plug > adj);
    }
    SUBCASE("ridge path agrees with the least-squares path for tiny ridge") {
        EmpiricalOptions ridge;
        ridge.ridge = 1e-12;
        const double a = capacity_tau_empirical(run.states, run.inputs, 0, CapacityMode::memory, ridge).value;
        const double b = capacity_tau_empirical(run.states, run.inputs, 0, CapacityMode::memory).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(capacity_tau_empirical(run.states, run.inputs, 1, CapacityMode::memory), std::invalid_argument);
        CHECK_THROWS_AS(capacity_tau_empirical(run.states, run.inputs, 0, CapacityMode::forecast), std::invalid_argument);
        CHECK_THROWS_AS(capacity_tau_empirical(run.states, run.inputs, -50'000, CapacityMode::memory),
                        std::invalid_argument);
        const std::vector<double> short_inputs(10, 1.0);
        CHECK_THROWS_AS(capacity_tau_empirical(run.states, short_inputs, 0, CapacityMode::memory),
                        std::invalid_argument);
    }
    SUBCASE("constant target has zero capacity") {
        const std::vector<double> flat(static_cast<std::size_t>(run.length()), 2.0);
        CHECK(capacity_tau_empirical(run.states, flat, 0, CapacityMode::memory).value == 0.0);
    }
}

TEST_CASE("common-window report matches per-lag values on the same window") {
    Rng rng(5);
    const auto sys = random_contracting_system(3, 0.7, rng);
    const auto z = simulate_arma(ArmaProcessSpec::ar1(0.4), 6000, 100, 8);
    const FilterRun run = run_filter(sys, z, 500);
    const CapacityReport rep = empirical_capacity_report(run.states, run.inputs, 5, 4);
    REQUIRE(rep.mc_tau.size() == 6);
    REQUIRE(rep.fc_h.size() == 4);
    CHECK(rep.estimator == EstimatorKind::empirical);
    // lag 0 on the common window [5, T-4) by hand
    const Eigen::Index count = run.length() - 9;
    const Matrix block = run.states.middleRows(5, count);
    const std::vector<double> target(run.inputs.begin() + 5, run.inputs.begin() + 5 + count);
    CHECK(capacity_tau_empirical(block, target, 0, CapacityMode::memory).value ==
          doctest::Approx(rep.mc_tau[0]).epsilon(1e-12));
    double total = 0.0;
    for (double v : rep.mc_tau) total += v;
    CHECK(rep.mc_total == doctest::Approx(total));
    CHECK_THROWS_AS(empirical_capacity_report(run.states, run.inputs, -1, 3), std::invalid_argument);
    CHECK_THROWS_AS(empirical_capacity_report(run.states, run.inputs, 3000, 3000), std::invalid_argument);
}

TEST_CASE("report bookkeeping") {
    CapacityReport r;
    r.mc_tau = std::vector<double>(12, 0.5);
    r.fc_h = {0.1, 0.2};
    r.finalize();
    CHECK(r.mc_total == doctest::Approx(6.0));
    CHECK(r.fc_total == doctest::Approx(0.3));
    CHECK(r.truncation_tail_estimate == doctest::Approx(5.0));
    CHECK(r.fc_truncation_tail_estimate == doctest::Approx(0.3));
    CHECK(r.tolerance() == 0.02);
    r.estimator = EstimatorKind::analytic_linear;
    CHECK(r.tolerance() == 1e-8);
    CHECK(to_string(EstimatorKind::analytic_linear) == "analytic-linear");
}

TEST_CASE("white-noise totals on the reference reservoir") {
    const Figure1System fs = make_figure1_system(15, 0.9, ExperimentConfig{}.seed);
    const CapacityReport rep = total_capacity_empirical(fs.system, ArmaProcessSpec::white_noise(), 250, 10'000, 17);
    CHECK(std::abs(rep.mc_total - 15.0) <= 0.5);
    CHECK(std::abs(rep.fc_total) <= 0.3);
    for (double v : rep.fc_h) CHECK(std::abs(v) <= 0.02);

    SUBCASE("continuity in phi near zero") {
        const CapacityReport near = total_capacity_empirical(fs.system, ArmaProcessSpec::ar1(0.01), 250, 10'000, 17);
        CHECK(std::abs(near.mc_total - rep.mc_total) <= 0.5);
    }
    SUBCASE("argument checks") {
        CHECK_THROWS_AS(total_capacity_empirical(fs.system, ArmaProcessSpec::white_noise(), 0, 1000, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(total_capacity_empirical(fs.system, ArmaProcessSpec::white_noise(), 300, 1000, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("theoretical bounds") {
    SUBCASE("white noise") {
        const BoundsReport b = theoretical_bounds(autocovariance(ArmaProcessSpec::white_noise()), 15);
        CHECK(b.rho_bound == doctest::Approx(15.0).epsilon(1e-12));
        CHECK(b.spectral_bound == doctest::Approx(15.0).epsilon(1e-9));
        CHECK(b.gershgorin == doctest::Approx(15.0).epsilon(1e-12));
        CHECK(b.flags.empty());
    }
    SUBCASE("AR(1) phi = 0.5") {
        const BoundsReport b = theoretical_bounds(autocovariance(ArmaProcessSpec::ar1(0.5)), 15);
        CHECK(b.spectral_bound == doctest::Approx(45.0).epsilon(1e-9));
        CHECK(b.gershgorin == doctest::Approx(45.0).epsilon(1e-9));
        CHECK(b.rho_bound <= 45.0);
        CHECK(b.rho_bound > 44.0);
    }
    SUBCASE("MA(1) theta = 0.5") {
        const BoundsReport b = theoretical_bounds(autocovariance(ArmaProcessSpec::ma1(0.5)), 15);
        CHECK(b.spectral_bound == doctest::Approx(27.0).epsilon(1e-9));
        CHECK(b.gershgorin == doctest::Approx(27.0).epsilon(1e-9));
        CHECK(b.rho_bound <= 27.0);
    }
    SUBCASE("non-convergence is flagged, never fatal") {
        const BoundsReport b = theoretical_bounds(autocovariance(ArmaProcessSpec::ar1(0.95)), 2, {1e-12, 16});
        CHECK_FALSE(b.rho_converged);
        REQUIRE_FALSE(b.flags.empty());
        CHECK(b.flags.front().rfind("rho_not_converged", 0) == 0);
    }
    CHECK_THROWS_AS(theoretical_bounds(autocovariance(ArmaProcessSpec::white_noise()), 0), std::invalid_argument);
}

TEST_CASE("validate_report") {
    Rng rng(21);
    const auto sys = random_contracting_system(4, 0.8, rng);
    const auto white = autocovariance(ArmaProcessSpec::white_noise());
    const BoundsReport wb = theoretical_bounds(white, 4);
    CapacityReport analytic = analytic_capacities_linear(sys, white, 200);
    CHECK(validate_report(analytic, wb).empty());

    SUBCASE("fabricated out-of-range lag") {
        analytic.mc_tau[3] = 1.5;
        analytic.finalize();
        const auto v = validate_report(analytic, wb);
        REQUIRE(v.size() >= 1);
        CHECK(v.front().kind == Violation::Kind::memory_range);
        REQUIRE(v.front().lag.has_value());
        CHECK(*v.front().lag == -3);
        CHECK(v.front().message.find("tau=-3") != std::string::npos);
    }
    SUBCASE("total above the bounds") {
        CapacityReport r;
        r.estimator = EstimatorKind::analytic_linear;
        r.mc_tau = std::vector<double>(6, 1.0);
        r.finalize();
        const auto v = validate_report(r, wb);
        REQUIRE(v.size() == 3);
        for (const auto& x : v) CHECK(x.kind == Violation::Kind::memory_total);
    }
    SUBCASE("empirical AR(1) phi = 0.9 on the reference reservoir") {
        const Figure1System fs = make_figure1_system(15, 0.9, ExperimentConfig{}.seed);
        const ArmaProcessSpec spec = ArmaProcessSpec::ar1(0.9);
        const CapacityReport rep = total_capacity_empirical(fs.system, spec, 250, 100'000, 5);
        const auto v = validate_report(rep, theoretical_bounds(autocovariance(spec), 15));
        CHECK(v.empty());
    }
}
