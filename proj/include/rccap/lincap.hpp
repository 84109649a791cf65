#pragma once

// Exact second-order analytics for linear systems F(x, z) = A x + C z:
// state covariances, analytic capacities by two independent routes,
// controllability diagnostics and the reduction to the reachable subspace.

#include "rccap/capacity.hpp"
#include "rccap/inputs.hpp"
#include "rccap/systems.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rccap {

/// Solves G = A G A^T + gamma0 C C^T by the doubling iteration
/// G <- G + A_k G A_k^T, A_k <- A_k^2 until the relative residual is <= 1e-12.
Matrix state_covariance_white(const LinearStateSystem& sys, double gamma0);

/// A series truncated at `truncation` terms with a certified bound on the
/// neglected part (spectral norm for matrices, Euclidean norm for vectors).
template <typename Value>
struct TruncatedSum {
    Value value;
    double tail_certificate = 0.0;
    std::int64_t truncation = 0;
    bool flagged = false;
};

/// G = sum_{j,k >= 0} A^j C gamma(j - k) C^T (A^k)^T. A non-positive
/// truncation picks the smallest J whose certificate is below
/// 1e-12 gamma(0) ||C||^2 (capped at 20000). Flagged when the certificate
/// exceeds 1e-8 trace(G).
TruncatedSum<Matrix> state_covariance_general(const LinearStateSystem& sys,
                                              const AutocovarianceFunction& acvf,
                                              std::int64_t truncation = 0);

/// Cov(X_t, Z_{t+tau}) = sum_{j >= 0} A^j C gamma(j + tau).
TruncatedSum<Vector> cross_covariance(const LinearStateSystem& sys, const AutocovarianceFunction& acvf,
                                      int tau, std::int64_t truncation = 0);

/// Closed-form capacities MC_tau = c^T G^{-1} c / gamma(0) with
/// c = Cov(X_t, Z_{t+tau}) for tau = 0..-tau_max, and FC at horizons
/// h = 1..tau_max. For white noise G = gamma0 K K^T with K = [C, AC, ...], and
/// MC_tau is evaluated as the squared projection of e_tau onto the row space
/// of K (singular values below 1e-10 s_max dropped), FC as zero. Otherwise,
/// when G has condition number >= 1e12 a pseudo-inverse (eigenvalues below
/// 1e-12 lambda_max dropped) is used. Both cases flag the condition number.
CapacityReport analytic_capacities_linear(const LinearStateSystem& sys,
                                          const AutocovarianceFunction& acvf, int tau_max,
                                          std::int64_t truncation = 0);

/// Memory capacity through the orthonormal coefficient vectors
/// B = G^{-1/2} [C, AC, ..., A^{L-1}C] (H^L)^{1/2}.
struct MemoryBVectors {
    Matrix b;                        // N x L
    double mc_estimate = 0.0;        // (1/gamma0) sum_i <B_i, H^L B_i>
    double mc_half_window = 0.0;     // same at window L/2 (convergence-in-L check)
    double orthonormality_error = 0.0;  // max |B B^T - I|
    double toeplitz_condition = 0.0;
    std::vector<std::string> flags;
};
MemoryBVectors b_vectors_memory(const LinearStateSystem& sys, const AutocovarianceFunction& acvf,
                                Eigen::Index window = 500);

/// Forecasting capacity through B on the index window [-L, L] of the doubly
/// infinite Toeplitz matrix: FC = (1/gamma0) sum_i ||P_+ (Hbar^{1/2} B_i)||^2,
/// P_+ zeroing non-positive indices. Cross-checked against the covariance
/// formula; flagged when the two disagree by more than 1e-2.
struct ForecastBVectors {
    std::vector<double> fc_h;  // per horizon h = 1..L
    double fc_estimate = 0.0;
    double analytic_fc = 0.0;
    double orthonormality_error = 0.0;
    std::vector<std::string> flags;
};
ForecastBVectors b_vectors_forecasting(const LinearStateSystem& sys,
                                       const AutocovarianceFunction& acvf,
                                       Eigen::Index window = 500);

/// R(A, C) = (C | AC | ... | A^{N-1} C).
Matrix controllability_matrix(const Matrix& a, const Vector& c);

/// Numerical rank: singular values above rel_threshold * sigma_max(m).
/// The default threshold is max(rows, cols) * machine epsilon.
Eigen::Index numerical_rank(const Matrix& m, std::optional<double> rel_threshold = std::nullopt);

struct ControllabilityReport {
    Matrix r;
    Eigen::Index rank = 0;
    bool kalman_full = false;
    bool eigen_distinct = false;
    bool eigen_nonzero = false;
    bool diagonalizable = false;
    /// Coefficients of C in the eigenbasis are all nonzero; empty when A is not
    /// diagonalizable.
    std::optional<bool> coeffs_nonzero;
    Vector singular_values;
    Eigen::VectorXcd eigenvalues;
};

ControllabilityReport controllability(const LinearStateSystem& sys,
                                      std::optional<double> rel_threshold = std::nullopt);

struct KernelCheck {
    bool match = false;
    Eigen::Index covariance_kernel_dim = 0;
    Eigen::Index controllability_kernel_dim = 0;
    std::vector<double> principal_angles;  // radians, empty on dimension mismatch
};

/// Compares ker G with ker R^T. Both use the same relative cut applied to
/// sqrt(eigenvalues of G) and to the singular values of R. Match requires equal
/// dimensions and largest principal angle < 1e-6. Eigenvalues of G carry an
/// absolute error near eps * lambda_max, so cuts much below 1e-7 are not
/// meaningful here.
KernelCheck kernel_equality_check(const Matrix& gamma_x, const Matrix& r, double rel_threshold = 1e-6);

/// White-noise version. ker G is read off the left singular vectors of the
/// factor sqrt(gamma0) (C | AC | ... | A^J C), G = F F^T up to a tail below
/// 1e-17 of the leading term, which keeps full precision and allows a much
/// tighter cut than the matrix overload.
KernelCheck kernel_equality_check(const LinearStateSystem& sys, double gamma0,
                                  double rel_threshold = 1e-10);

/// Restriction of a linear system to X = col R(A, C) in an orthonormal basis Q:
/// A_bar = Q^T A Q, C_bar = Q^T C, injection x_bar -> Q x_bar. Column signs are
/// fixed so that C_bar >= 0.
struct ReducedSystem {
    Matrix a_bar;
    Vector c_bar;
    Matrix injection;  // N x r
    bool abar_diagonalizable = true;
    bool abar_eigen_nonzero = true;
    bool rank_preserved = true;

    Eigen::Index rank() const { return c_bar.size(); }
    LinearStateSystem system() const { return LinearStateSystem(a_bar, c_bar); }
};

ReducedSystem reduce_system(const LinearStateSystem& sys,
                            std::optional<double> rel_threshold = std::nullopt);

struct RankCapacity {
    Eigen::Index mc = 0;
    int fc = 0;
    /// A_bar diagonalizable with nonzero eigenvalues (vacuous when rank is 0).
    bool hypotheses_met = true;
};

/// White-noise memory capacity as the rank of the controllability matrix.
RankCapacity memory_capacity_via_rank(const LinearStateSystem& sys,
                                      std::optional<double> rel_threshold = std::nullopt);

}  // namespace rccap
