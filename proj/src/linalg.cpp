#include "rccap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rccap {

double sigma_max(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double spectral_radius(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SymmetricRoots symmetric_roots(const Matrix& s, double clamp_rel) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Vector& lambda = es.eigenvalues();
    const double top = std::max(lambda.size() ? lambda.maxCoeff() : 0.0, 0.0);
    const double floor = std::max(clamp_rel * top, std::numeric_limits<double>::min());
    const Vector clamped = lambda.cwiseMax(floor);
    const Matrix& v = es.eigenvectors();
    SymmetricRoots out;
    out.sqrt = v * clamped.cwiseSqrt().asDiagonal() * v.transpose();
    out.inv_sqrt = v * clamped.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    out.eigenvalues = lambda;
    return out;
}

Matrix symmetric_sqrt(const Matrix& s, double clamp_rel) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Vector& lambda = es.eigenvalues();
    const double top = std::max(lambda.size() ? lambda.maxCoeff() : 0.0, 0.0);
    const Vector clamped = lambda.cwiseMax(clamp_rel * top);
    const Matrix& v = es.eigenvectors();
    return v * clamped.cwiseSqrt().asDiagonal() * v.transpose();
}

double condition_number_symmetric(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

Matrix symmetric_kernel_basis(const Matrix& s, double rel_threshold) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const Vector& lambda = es.eigenvalues();
    const double cut = rel_threshold * std::max(lambda.maxCoeff(), 0.0);
    int k = 0;
    while (k < lambda.size() && lambda(k) <= cut) ++k;
    return es.eigenvectors().leftCols(k);
}

Matrix left_kernel_basis(const Matrix& m, double rel_threshold) {
    const auto n = m.rows();
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const Vector& sv = svd.singularValues();
    const double cut = rel_threshold * (sv.size() ? sv(0) : 0.0);
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return svd.matrixU().rightCols(n - r);
}

double largest_principal_angle_sine(const Matrix& u, const Matrix& v) {
    if (u.cols() != v.cols()) return 1.0;
    if (u.cols() == 0) return 0.0;
    const Matrix residual = u - v * (v.transpose() * u);
    return std::min(1.0, sigma_max(residual));
}

Matrix random_gaussian(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    // Fill row by row so the draw order does not depend on storage order.
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
}

Matrix random_orthogonal(int n, Rng& rng) {
    const Matrix g = random_gaussian(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

Rng derived_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

}  // namespace rccap
