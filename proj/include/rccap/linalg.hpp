#pragma once

// Dense linear algebra helpers shared by the capacity modules.

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace rccap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Largest singular value (the operator 2-norm). Zero for empty matrices.
double sigma_max(const Matrix& m);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Matrix& m);

/// Square root and inverse square root of a symmetric PSD matrix computed by
/// orthogonal diagonalization. Eigenvalues below `clamp_rel * lambda_max` are
/// clamped to that floor before rooting.
struct SymmetricRoots {
    Matrix sqrt;
    Matrix inv_sqrt;
    Vector eigenvalues;  // ascending, before clamping
};

SymmetricRoots symmetric_roots(const Matrix& s, double clamp_rel = 1e-14);

/// Square root only (skips forming the inverse).
Matrix symmetric_sqrt(const Matrix& s, double clamp_rel = 1e-14);

/// lambda_max / lambda_min of a symmetric matrix; +inf when lambda_min <= 0.
double condition_number_symmetric(const Matrix& s);

/// Orthonormal basis of the eigenvectors whose eigenvalues fall at or below
/// `rel_threshold * lambda_max` (the numerical kernel of a PSD matrix).
Matrix symmetric_kernel_basis(const Matrix& s, double rel_threshold);

/// Orthonormal basis of ker(m^T): left singular vectors whose singular value
/// is at or below `rel_threshold * sigma_max(m)`, completed by the directions
/// beyond the column count.
Matrix left_kernel_basis(const Matrix& m, double rel_threshold);

/// Sine of the largest principal angle between the column spans of two
/// orthonormal bases of equal width. Returns 1 when the widths differ.
double largest_principal_angle_sine(const Matrix& u, const Matrix& v);

/// Haar-distributed orthogonal matrix.
Matrix random_orthogonal(int n, Rng& rng);

/// Matrix with i.i.d. standard normal entries.
Matrix random_gaussian(int rows, int cols, Rng& rng);

/// Deterministic RNG stream for sub-task `stream` of a run seeded by `seed`.
Rng derived_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace rccap
