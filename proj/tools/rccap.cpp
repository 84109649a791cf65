// Command-line front end: the capacity sweep, single-system reports, bounds,
// reduction, rank capacity and the property self-test.

#include "rccap/capacity.hpp"
#include "rccap/experiment.hpp"
#include "rccap/lincap.hpp"
#include "rccap/properties.hpp"
#include "rccap/serialization.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

using namespace rccap;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SystemArgs {
    std::string path;
    int n = 15;
    double rho = 0.9;
    std::optional<int> rank;
    std::uint64_t seed = ExperimentConfig{}.seed;

    void add(CLI::App* cmd) {
        cmd->add_option("--system", path, "JSON system document (type, A, C, ...)");
        cmd->add_option("--n", n, "state dimension of the generated system")->check(CLI::PositiveNumber);
        cmd->add_option("--rho", rho, "target spectral radius of the generated system");
        cmd->add_option("--rank", rank, "generate a system whose controllability matrix has this rank");
        cmd->add_option("--seed", seed, "random seed");
    }

    LinearStateSystem linear() const {
        if (!path.empty()) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot read " + path);
            return linear_system_from_json(Json::parse(in));
        }
        if (rank) {
            if (*rank < 0 || *rank > n) throw UsageError("--rank must lie in [0, n]");
            Rng rng = derived_rng(seed, 0);
            return random_system_with_rank(n, *rank, rng).system;
        }
        return make_figure1_system(n, rho, seed).system;
    }

    std::unique_ptr<StateSystem> any() const {
        if (!path.empty()) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot read " + path);
            return system_from_json(Json::parse(in));
        }
        return std::make_unique<LinearStateSystem>(linear());
    }
};

std::vector<GridPoint> parse_grid(const std::vector<std::string>& items, InputModel model) {
    std::vector<GridPoint> pairs;
    std::vector<double> values;
    for (const auto& item : items) {
        const auto colon = item.find(':');
        try {
            if (colon == std::string::npos) {
                values.push_back(std::stod(item));
            } else {
                pairs.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
            }
        } catch (const std::logic_error&) {
            throw UsageError("bad --grid entry '" + item + "'");
        }
    }
    if (!pairs.empty() && !values.empty()) throw UsageError("--grid mixes values and phi:theta pairs");
    return pairs.empty() ? grid_from_values(model, values) : pairs;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memory and forecasting capacities of linear and echo state reservoirs"};
    app.require_subcommand(1);

    // figure1
    ExperimentConfig cfg;
    std::vector<std::string> models{"ar1", "ma1", "arma11"};
    std::vector<std::string> grid;
    bool raw_r2 = false;
    auto* fig = app.add_subcommand("figure1", "sweep AR(1), MA(1), ARMA(1,1) inputs on an N-dimensional system");
    fig->set_config("--config", "", "TOML file with option defaults; command-line flags win");
    fig->add_option("--n", cfg.n, "state dimension")->capture_default_str();
    fig->add_option("--rho", cfg.spectral_radius, "target spectral radius of A")->capture_default_str();
    fig->add_option("--tau-max", cfg.tau_max, "largest memory lag and forecast horizon")->capture_default_str();
    fig->add_option("--length", cfg.length, "retained path length")->capture_default_str();
    fig->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    fig->add_option("--model", models, "comma-separated input models")->delimiter(',')->capture_default_str();
    fig->add_option("--grid", grid,
                    "comma-separated parameter values, or phi:theta pairs applied to every model")
        ->delimiter(',');
    fig->add_option("--out", cfg.output_dir, "output directory")->capture_default_str();
    fig->add_flag("--plot", cfg.plot, "also write figure1_<model>.svg");
    fig->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    fig->add_flag("--raw-r2", raw_r2, "use the plug-in R^2 instead of the degrees-of-freedom adjusted one");

    // capacity
    SystemArgs cap_sys;
    ArmaProcessSpec cap_input;
    int cap_tau = 250;
    std::size_t cap_length = 10'000;
    bool cap_analytic = false;
    auto* cap = app.add_subcommand("capacity", "capacities of one system under one input model");
    cap->set_config("--config");
    cap_sys.add(cap);
    cap->add_option("--phi", cap_input.phi, "autoregressive coefficient");
    cap->add_option("--theta", cap_input.theta, "moving-average coefficient");
    cap->add_option("--sigma", cap_input.sigma, "innovation standard deviation");
    cap->add_option("--tau-max", cap_tau, "largest lag / horizon")->capture_default_str();
    cap->add_option("--length", cap_length, "retained path length for the empirical estimate")->capture_default_str();
    cap->add_flag("--analytic", cap_analytic, "closed-form covariances instead of simulation (linear systems)");

    // bounds
    ArmaProcessSpec bnd_input;
    int bnd_n = 15;
    auto* bnd = app.add_subcommand("bounds", "capacity bounds for an ARMA(1,1) input");
    bnd->set_config("--config");
    bnd->add_option("--n", bnd_n, "state dimension")->check(CLI::PositiveNumber)->capture_default_str();
    bnd->add_option("--phi", bnd_input.phi, "autoregressive coefficient");
    bnd->add_option("--theta", bnd_input.theta, "moving-average coefficient");
    bnd->add_option("--sigma", bnd_input.sigma, "innovation standard deviation");

    // reduce / rank
    SystemArgs red_sys, rank_sys;
    auto* red = app.add_subcommand("reduce", "restrict a linear system to its reachable subspace");
    red->set_config("--config");
    red_sys.add(red);
    auto* rnk = app.add_subcommand("rank", "white-noise memory capacity as the controllability rank");
    rnk->set_config("--config");
    rank_sys.add(rnk);

    // selftest
    std::uint64_t st_seed = 1;
    std::string st_scale = "quick";
    bool st_fault = false;
    auto* st = app.add_subcommand("selftest", "run the randomized property batteries");
    st->add_option("--seed", st_seed, "random seed")->capture_default_str();
    st->add_option("--scale", st_scale, "quick or full")->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
    st->add_flag("--inject-fault", st_fault, "negate empirical capacities (the rank battery must fail)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*fig) {
            cfg.models.clear();
            for (const auto& m : models) cfg.models.push_back(input_model_from_string(m));
            if (!grid.empty()) {
                bool pairs = false;
                for (const auto& g : grid) pairs = pairs || g.find(':') != std::string::npos;
                if (pairs) {
                    cfg.param_grid = parse_grid(grid, InputModel::ar1);
                } else if (cfg.models.size() == 1) {
                    cfg.param_grid = parse_grid(grid, cfg.models.front());
                } else {
                    throw UsageError("plain --grid values need a single --model; use phi:theta pairs otherwise");
                }
            }
            cfg.estimator.adjust_for_dof = !raw_r2;
            cfg.validate();
            const Figure1Result res = run_figure1(cfg);
            std::ofstream sys_out(std::filesystem::path(cfg.output_dir) / "figure1_system.json");
            Json doc = system_to_json(res.system.system);
            doc["achieved_rho"] = res.system.achieved_rho;
            doc["sigma_capped"] = res.system.sigma_capped;
            doc["attempts"] = res.system.attempts;
            sys_out << doc.dump(2) << "\n";
            std::cerr << "system: N=" << cfg.n << " achieved rho(A)=" << res.system.achieved_rho
                      << (res.system.sigma_capped ? " (sigma_max capped at 0.99)" : "") << "\n"
                      << "wrote " << res.rows.size() << " rows to "
                      << (std::filesystem::path(cfg.output_dir) / "figure1.csv").string() << "\n";
            return 0;
        }
        if (*cap) {
            cap_input.validate();
            const auto acvf = autocovariance(cap_input);
            Json out;
            std::unique_ptr<StateSystem> sys = cap_sys.any();
            CapacityReport report;
            if (cap_analytic) {
                const auto* lin = dynamic_cast<const LinearStateSystem*>(sys.get());
                if (!lin) throw UsageError("--analytic needs a linear system");
                report = analytic_capacities_linear(*lin, acvf, cap_tau);
            } else {
                report = total_capacity_empirical(*sys, cap_input, cap_tau, cap_length, cap_sys.seed);
            }
            const BoundsReport bounds = theoretical_bounds(acvf, static_cast<int>(sys->dim()));
            out["input"] = to_json(cap_input);
            out["capacity"] = to_json(report);
            out["bounds"] = to_json(bounds);
            Json violations = Json::array();
            for (const auto& v : validate_report(report, bounds)) violations.push_back(v.message);
            out["violations"] = violations;
            print(out);
            return violations.empty() ? 0 : kExitFailure;
        }
        if (*bnd) {
            bnd_input.validate();
            print(to_json(theoretical_bounds(autocovariance(bnd_input), bnd_n)));
            return 0;
        }
        if (*red) {
            const LinearStateSystem sys = red_sys.linear();
            Json out = to_json(reduce_system(sys));
            out["original"] = system_to_json(sys);
            out["controllability"] = to_json(controllability(sys));
            print(out);
            return 0;
        }
        if (*rnk) {
            const LinearStateSystem sys = rank_sys.linear();
            const RankCapacity rc = memory_capacity_via_rank(sys);
            print({{"mc", rc.mc}, {"fc", rc.fc}, {"hypotheses_met", rc.hypotheses_met},
                   {"controllability", to_json(controllability(sys))}});
            return 0;
        }
        if (*st) {
            FaultInjection faults;
            faults.capacity_sign_flip = st_fault;
            const auto report = run_property_suite(st_seed, suite_scale_from_string(st_scale), faults,
                                                   [](const PropertyResult& r) {
                                                       std::cerr << (r.passed ? "pass " : "FAIL ") << r.module << "/"
                                                                 << r.name << " (" << r.cases << " cases, "
                                                                 << r.seconds << " s)"
                                                                 << (r.passed ? "" : ": " + r.detail) << "\n";
                                                   });
            print(report.to_json());
            return report.all_passed() ? 0 : kExitFailure;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Json::exception& e) {
        std::cerr << "error: malformed system document: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
