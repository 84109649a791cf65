#pragma once

// State-space systems x_t = F(x_{t-1}, z_t) driven by scalar inputs: linear
// systems, echo state networks, affine conjugates of either, the state filter,
// echo-state-property checks and system morphisms.

#include "rccap/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rccap {

/// Immutable state map F: R^N x R -> R^N.
class StateSystem {
public:
    virtual ~StateSystem() = default;

    virtual Eigen::Index dim() const = 0;
    virtual Vector step(const Vector& x, double z) const = 0;
    /// Lipschitz constant of F in the state (Euclidean norm). Values below one
    /// certify the echo state property.
    virtual double lipschitz_constant() const = 0;
    virtual std::unique_ptr<StateSystem> clone() const = 0;
};

/// F(x, z) = A x + C z with sigma_max(A) < 1.
class LinearStateSystem final : public StateSystem {
public:
    /// Throws std::invalid_argument on dimension mismatch or sigma_max(A) >= 1.
    LinearStateSystem(Matrix a, Vector c);

    const Matrix& a() const { return a_; }
    const Vector& c() const { return c_; }
    double sigma_max_a() const { return sigma_max_; }

    Eigen::Index dim() const override { return a_.rows(); }
    Vector step(const Vector& x, double z) const override { return a_ * x + c_ * z; }
    double lipschitz_constant() const override { return sigma_max_; }
    std::unique_ptr<StateSystem> clone() const override {
        return std::make_unique<LinearStateSystem>(*this);
    }

private:
    Matrix a_;
    Vector c_;
    double sigma_max_;
};

enum class Activation { tanh, identity };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

/// F(x, z) = act(A x + C z + zeta) with an odd 1-Lipschitz activation, so
/// sigma_max(A) < 1 makes F a contraction in x.
class EchoStateNetwork final : public StateSystem {
public:
    EchoStateNetwork(Matrix a, Vector c, Vector zeta, Activation act);

    const Matrix& a() const { return a_; }
    const Vector& c() const { return c_; }
    const Vector& zeta() const { return zeta_; }
    Activation activation() const { return act_; }

    Eigen::Index dim() const override { return a_.rows(); }
    Vector step(const Vector& x, double z) const override;
    double lipschitz_constant() const override { return sigma_max_; }
    std::unique_ptr<StateSystem> clone() const override {
        return std::make_unique<EchoStateNetwork>(*this);
    }

private:
    Matrix a_;
    Vector c_;
    Vector zeta_;
    Activation act_;
    double sigma_max_;
};

/// f(x) = M x + b, possibly between spaces of different dimension.
struct AffineMap {
    Matrix linear;
    Vector offset;

    Vector operator()(const Vector& x) const { return linear * x + offset; }

    static AffineMap identity(Eigen::Index n) {
        return {Matrix::Identity(n, n), Vector::Zero(n)};
    }
    static AffineMap linear_map(Matrix m) {
        const auto rows = m.rows();
        return {std::move(m), Vector::Zero(rows)};
    }
};

/// The system f o F o (f^{-1} x id) induced on the target of an invertible
/// affine map f.
class ConjugateSystem final : public StateSystem {
public:
    ConjugateSystem(const StateSystem& base, AffineMap forward, AffineMap inverse);
    ConjugateSystem(const ConjugateSystem& other);
    ConjugateSystem& operator=(const ConjugateSystem&) = delete;

    const StateSystem& base() const { return *base_; }
    const AffineMap& forward() const { return forward_; }
    const AffineMap& inverse() const { return inverse_; }

    Eigen::Index dim() const override { return forward_.linear.rows(); }
    Vector step(const Vector& x, double z) const override {
        return forward_(base_->step(inverse_(x), z));
    }
    /// ||M|| * ||M^{-1}|| * Lip(F): a bound, not necessarily below one.
    double lipschitz_constant() const override { return lipschitz_; }
    std::unique_ptr<StateSystem> clone() const override {
        return std::make_unique<ConjugateSystem>(*this);
    }

private:
    std::unique_ptr<StateSystem> base_;
    AffineMap forward_;
    AffineMap inverse_;
    double lipschitz_;
};

/// sigma_max(A) for linear systems; sigma_max(A) * Lip(act) for ESNs.
double contraction_constant(const LinearStateSystem& sys);
double contraction_constant(const EchoStateNetwork& sys);

/// State trajectory after washout. states.row(t) = F(states.row(t-1), inputs[t]).
struct FilterRun {
    Matrix states;  // T x N
    std::vector<double> inputs;
    std::size_t washout = 0;

    Eigen::Index length() const { return states.rows(); }
};

/// Iterates the state map from `initial` (zero by default) and drops the first
/// `washout` states. Throws std::invalid_argument for nonfinite inputs or
/// inputs.size() <= washout.
FilterRun run_filter(const StateSystem& sys, std::span<const double> inputs, std::size_t washout,
                     const std::optional<Vector>& initial = std::nullopt);

struct EspReport {
    double initial_gap = 0.0;    // max pairwise distance of the starting states
    double max_final_gap = 0.0;  // max pairwise distance after the last input
    double rate_estimate = 0.0;  // fitted geometric decay rate of the gap
    double contraction = 0.0;
    bool flagged = false;        // rate_estimate > contraction + 0.05
};

/// Runs the filter from `trials` random initial states over the same inputs
/// and fits the geometric decay of the largest pairwise gap.
EspReport verify_esp_convergence(const StateSystem& sys, std::span<const double> inputs,
                                 int trials, std::uint64_t seed);

/// Standardized realization F~(x, z) = G^{-1/2}(F(G^{1/2} x + mu, z) - mu).
struct Standardization {
    ConjugateSystem system;
    AffineMap map;      // x -> G^{-1/2}(x - mu)
    AffineMap inverse;  // x -> G^{1/2} x + mu
};

/// Throws std::invalid_argument when gamma_x is not symmetric positive definite
/// (min eigenvalue <= 1e-10 max eigenvalue); singular covariances of linear
/// systems go through reduce_system instead.
Standardization standardize(const StateSystem& sys, const Vector& mu, const Matrix& gamma_x);

struct MorphismCheck {
    bool holds = true;
    int probes_checked = 0;
    struct Witness {
        Vector x;
        double z = 0.0;
        double residual = 0.0;
    };
    std::optional<Witness> witness;

    explicit operator bool() const { return holds; }
};

/// Checks system equivariance f(F1(x, z)) = F2(f(x), z) on random probes to
/// tolerance 1e-9 (1 + ||x||); stops at the first violation.
MorphismCheck verify_morphism(const AffineMap& f, const StateSystem& sys1, const StateSystem& sys2,
                              int probes, std::uint64_t seed);

}  // namespace rccap
