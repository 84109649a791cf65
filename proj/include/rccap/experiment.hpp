#pragma once

// The N = 15 capacity sweep over AR(1), MA(1) and ARMA(1,1) inputs: system
// construction, parallel evaluation of the grid, CSV and SVG output.

#include "rccap/capacity.hpp"
#include "rccap/systems.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rccap {

enum class InputModel { ar1, ma1, arma11 };

std::string to_string(InputModel model);
/// Throws std::invalid_argument for names other than ar1, ma1, arma11.
InputModel input_model_from_string(const std::string& name);

struct GridPoint {
    double phi = 0.0;
    double theta = 0.0;
};

/// Default sweep values 0, 0.1, ..., 0.9 mapped onto (phi, theta) per model:
/// ar1 varies phi, ma1 varies theta, arma11 sets phi = theta.
std::vector<GridPoint> default_grid(InputModel model);
std::vector<GridPoint> grid_from_values(InputModel model, const std::vector<double>& values);

struct ExperimentConfig {
    int n = 15;
    double spectral_radius = 0.9;
    int tau_max = 250;
    std::size_t length = 10'000;
    std::uint64_t seed = 20'240'101;
    /// Seed of the reservoir draw when it should differ from `seed` (input
    /// paths always follow `seed`).
    std::optional<std::uint64_t> system_seed;
    std::vector<InputModel> models{InputModel::ar1, InputModel::ma1, InputModel::arma11};
    /// Explicit (phi, theta) pairs applied to every model; empty selects
    /// default_grid(model).
    std::vector<GridPoint> param_grid;
    std::string output_dir = ".";
    bool plot = false;
    /// 0 uses the hardware concurrency; RCCAP_THREADS caps either value.
    unsigned threads = 0;
    EmpiricalOptions estimator{};
    SimulationOptions simulation{};

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct Figure1System {
    LinearStateSystem system;
    double achieved_rho = 0.0;
    bool sigma_capped = false;
    int attempts = 0;
};

/// Gaussian A rescaled to spectral radius `spectral_radius`, then to
/// sigma_max(A) = 0.99 when that normalization leaves sigma_max >= 1. C is
/// uniform on the unit sphere. Redraws until R(A, C) has full rank; throws
/// std::runtime_error after 100 attempts.
Figure1System make_figure1_system(int n, double spectral_radius, std::uint64_t seed);

struct Figure1Row {
    InputModel model = InputModel::ar1;
    GridPoint point;
    CapacityReport capacity;
    BoundsReport bounds;
};

struct Figure1Result {
    Figure1System system;
    std::vector<Figure1Row> rows;  // ordered by model, then grid index

    std::string csv() const;
    /// Line chart of MC, FC and the three bounds against the swept parameter.
    std::string svg(InputModel model) const;
};

/// Evaluates the sweep without touching the file system.
Figure1Result compute_figure1(const ExperimentConfig& config);

/// compute_figure1 plus figure1.csv (and figure1_<model>.svg when plotting)
/// in config.output_dir. Throws std::runtime_error on IO failure.
Figure1Result run_figure1(const ExperimentConfig& config);

/// Worker count after applying RCCAP_THREADS.
unsigned effective_threads(unsigned requested);

}  // namespace rccap
