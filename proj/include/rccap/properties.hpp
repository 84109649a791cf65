#pragma once

// Randomized invariant batteries for every module, the generators they draw
// from, and a suite runner with a JSON summary.

#include "rccap/inputs.hpp"
#include "rccap/lincap.hpp"
#include "rccap/serialization.hpp"
#include "rccap/systems.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rccap {

// ---- generators -----------------------------------------------------------

/// Gaussian A rescaled to sigma_max(A) = sigma, C uniform on the unit sphere.
LinearStateSystem random_contracting_system(int n, double sigma, Rng& rng);

/// System whose controllability matrix has rank exactly r by construction:
/// A = Q blkdiag(A1, A2) Q^T and C = Q (c1, 0) with (A1, c1) generic of size r.
/// sigma_max of both blocks is drawn from [0.3, max_sigma].
struct RankedSystem {
    LinearStateSystem system;
    Matrix reachable_basis;  // N x r, orthonormal
    int rank = 0;
};
RankedSystem random_system_with_rank(int n, int r, Rng& rng, double max_sigma = 0.9);

/// A = V D V^{-1} with real eigenvalues spread over [-0.45, 0.45] and
/// kappa(V) <= 2, so sigma_max(A) < 1. C = V c with |c_i| in [0.5, 1] before
/// normalization, so no eigendirection is left unexcited. With `repeated` two
/// eigenvalues coincide. n >= 2 when repeated.
struct DiagonalizableSystem {
    LinearStateSystem system;
    Vector eigenvalues;
    bool repeated = false;
};
DiagonalizableSystem random_diagonalizable_system(int n, bool repeated, Rng& rng);

/// ARMA(1,1) with phi, theta drawn from [-0.8, 0.8].
ArmaProcessSpec random_arma_spec(Rng& rng);

/// tanh network with sigma_max(A) = sigma, unit-norm C and a small bias.
EchoStateNetwork random_esn(int n, double sigma, Rng& rng);

/// Largest residual of the least-squares nondecreasing fit (pool adjacent
/// violators) to `values`.
double isotonic_max_residual(const std::vector<double>& values);

// ---- suite ----------------------------------------------------------------

enum class SuiteScale { quick, full };

std::string to_string(SuiteScale scale);
SuiteScale suite_scale_from_string(const std::string& name);

/// Deliberate defects used to check that the batteries can fail.
struct FaultInjection {
    /// Negates every empirical capacity seen by the rank battery.
    bool capacity_sign_flip = false;
};

struct PropertyResult {
    std::string module;
    std::string name;
    bool passed = true;
    int cases = 0;
    std::string detail;
    double seconds = 0.0;
};

struct PropertySuiteReport {
    std::uint64_t seed = 0;
    SuiteScale scale = SuiteScale::quick;
    std::vector<PropertyResult> results;
    double seconds = 0.0;

    bool all_passed() const;
    Json to_json() const;
};

using PropertyProgress = std::function<void(const PropertyResult&)>;

/// Runs every battery. Batteries run in parallel (RCCAP_THREADS caps the
/// worker count); results are reported in a fixed order.
PropertySuiteReport run_property_suite(std::uint64_t seed, SuiteScale scale,
                                       const FaultInjection& faults = {},
                                       const PropertyProgress& progress = {});

/// Names of the batteries in suite order, as "module/name".
std::vector<std::string> property_names();

}  // namespace rccap
