#include "rccap/experiment.hpp"
#include "rccap/properties.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rccap;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.n = 3;
    cfg.tau_max = 20;
    cfg.length = 2'000;
    cfg.seed = 7;
    cfg.models = {InputModel::ar1, InputModel::ma1};
    cfg.param_grid = {{0.0, 0.0}, {0.4, 0.4}};
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("input models and grids") {
    CHECK(input_model_from_string("arma11") == InputModel::arma11);
    CHECK(to_string(InputModel::ma1) == "ma1");
    CHECK_THROWS_AS(input_model_from_string("ar2"), std::invalid_argument);

    const auto ar = default_grid(InputModel::ar1);
    REQUIRE(ar.size() == 10);
    CHECK(ar[9].phi == doctest::Approx(0.9));
    CHECK(ar[9].theta == 0.0);
    const auto ma = default_grid(InputModel::ma1);
    CHECK(ma[3].phi == 0.0);
    CHECK(ma[3].theta == doctest::Approx(0.3));
    const auto both = grid_from_values(InputModel::arma11, {0.2});
    CHECK(both[0].phi == 0.2);
    CHECK(both[0].theta == 0.2);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.spectral_radius = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.length = static_cast<std::size_t>(cfg.tau_max);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.models.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.param_grid = {{1.0, 0.0}};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("reservoir construction") {
    const Figure1System one = make_figure1_system(1, 0.5, 3);
    CHECK(std::abs(one.system.a()(0, 0)) == doctest::Approx(0.5));
    CHECK(std::abs(one.system.c()(0)) == doctest::Approx(1.0));
    CHECK(one.achieved_rho == doctest::Approx(0.5));

    const Figure1System big = make_figure1_system(15, 0.9, 20'240'101);
    CHECK(big.system.c().norm() == doctest::Approx(1.0));
    CHECK(sigma_max(big.system.a()) < 1.0);
    CHECK(controllability(big.system).rank == 15);
    if (!big.sigma_capped) CHECK(big.achieved_rho == doctest::Approx(0.9));
    const Figure1System again = make_figure1_system(15, 0.9, 20'240'101);
    CHECK(again.system.a() == big.system.a());
}

TEST_CASE("sweep output") {
    const ExperimentConfig cfg = small_config();
    const Figure1Result res = compute_figure1(cfg);
    REQUIRE(res.rows.size() == 4);
    CHECK(res.rows[0].model == InputModel::ar1);
    CHECK(res.rows[3].model == InputModel::ma1);
    CHECK(res.rows[3].point.theta == doctest::Approx(0.4));

    const std::string csv = res.csv();
    CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(compute_figure1(cfg).csv() == csv);

    ExperimentConfig serial = cfg;
    serial.threads = 1;
    CHECK(compute_figure1(serial).csv() == csv);

    ExperimentConfig other_system = cfg;
    other_system.system_seed = 8;
    CHECK(compute_figure1(other_system).csv() != csv);

    const std::string svg = res.svg(InputModel::ar1);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
}

TEST_CASE("sweep files") {
    const auto dir = std::filesystem::temp_directory_path() / "rccap_sweep_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ExperimentConfig cfg = small_config();
    cfg.output_dir = dir.string();
    run_figure1(cfg);
    const std::string plain = slurp(dir / "figure1.csv");
    CHECK_FALSE(std::filesystem::exists(dir / "figure1_ar1.svg"));
    cfg.plot = true;
    run_figure1(cfg);
    CHECK(slurp(dir / "figure1.csv") == plain);
    CHECK(std::filesystem::exists(dir / "figure1_ar1.svg"));
    CHECK(std::filesystem::exists(dir / "figure1_ma1.svg"));

    // a regular file where the directory should be
    std::ofstream(dir / "blocker") << "x";
    cfg.output_dir = (dir / "blocker" / "sub").string();
    cfg.plot = false;
    CHECK_THROWS_AS(run_figure1(cfg), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("isotonic residual") {
    CHECK(isotonic_max_residual({}) == 0.0);
    CHECK(isotonic_max_residual({1, 2, 3}) == 0.0);
    CHECK(isotonic_max_residual({1, 3, 2}) == doctest::Approx(0.5));
    CHECK(isotonic_max_residual({3, 2, 1}) == doctest::Approx(1.0));
    CHECK(isotonic_max_residual({0, 5, 0, 5}) == doctest::Approx(2.5));
}

TEST_CASE("property suite") {
    CHECK(property_names().size() == 24);
    CHECK(suite_scale_from_string("full") == SuiteScale::full);
    CHECK_THROWS_AS(suite_scale_from_string("huge"), std::invalid_argument);
    const PropertySuiteReport clean = run_property_suite(11, SuiteScale::quick);
    for (const auto& r : clean.results) CHECK_MESSAGE(r.passed, r.module << "/" << r.name << ": " << r.detail);
    CHECK(clean.to_json()["results"].size() == 24);

    FaultInjection fault;
    fault.capacity_sign_flip = true;
    const PropertySuiteReport broken = run_property_suite(11, SuiteScale::quick, fault);
    CHECK_FALSE(broken.all_passed());
}
