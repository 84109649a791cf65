#include "rccap/lincap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rccap {

namespace {

constexpr std::int64_t kMaxTruncation = 20'000;

/// Columns A^k C for k = 0..count-1.
Matrix krylov_columns(const Matrix& a, const Vector& c, Eigen::Index count) {
    Matrix k(c.size(), count);
    if (count == 0) return k;
    k.col(0) = c;
    for (Eigen::Index j = 1; j < count; ++j) k.col(j) = a * k.col(j - 1);
    return k;
}

/// Geometric tail factor s^{J+1} / (1 - s) for s = sigma_max(A).
double geometric_tail(double s, std::int64_t j) {
    if (s == 0.0) return 0.0;
    return std::pow(s, static_cast<double>(j + 1)) / (1.0 - s);
}

std::int64_t auto_truncation(double s, double factor, double tol) {
    if (s == 0.0 || factor == 0.0) return 0;
    // smallest J with factor * s^{J+1}/(1-s) <= tol
    const double j = std::log(tol * (1.0 - s) / factor) / std::log(s) - 1.0;
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(std::max(j, 0.0))), 0,
                                    kMaxTruncation);
}

struct EigenDiagnostics {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
    bool distinct = true;
    bool nonzero = true;
    bool diagonalizable = true;
};

EigenDiagnostics eigen_diagnostics(const Matrix& a) {
    EigenDiagnostics d;
    const auto n = a.rows();
    if (n == 0) return d;
    Eigen::EigenSolver<Matrix> es(a);
    d.values = es.eigenvalues();
    d.vectors = es.eigenvectors();
    const double scale = d.values.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (!(std::abs(d.values(i) - d.values(j)) > 1e-8 * scale)) d.distinct = false;
    const double norm = sigma_max(a);
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(std::abs(d.values(i)) > 1e-8 * norm)) d.nonzero = false;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d.vectors);
    const Vector sv = svd.singularValues();
    d.diagonalizable = sv(n - 1) > 0.0 && sv(0) / sv(n - 1) < 1e10;
    return d;
}

/// Inverse-square-root factor W (G^{-1} = W W^T) with a pseudo-inverse
/// fallback for numerically singular G.
struct CovarianceFactor {
    Matrix w;
    double condition = 1.0;
    bool singular = false;
};

CovarianceFactor factor_covariance(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Vector& lambda = es.eigenvalues();
    const double hi = lambda.maxCoeff();
    const double lo = lambda.minCoeff();
    CovarianceFactor out;
    out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    out.singular = !(out.condition < 1e12);
    const double cut = out.singular ? 1e-12 * hi : 0.0;
    Vector scale(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        scale(i) = lambda(i) > cut ? 1.0 / std::sqrt(lambda(i)) : 0.0;
    out.w = es.eigenvectors() * scale.asDiagonal();
    return out;
}

Matrix covariance_for(const LinearStateSystem& sys, const AutocovarianceFunction& acvf,
                      std::vector<std::string>& flags) {
    if (acvf.tail_bound(0) == 0.0) return state_covariance_white(sys, acvf.gamma0());
    const auto g = state_covariance_general(sys, acvf);
    if (g.flagged) flags.push_back("covariance_tail_certificate_exceeded");
    return g.value;
}

std::string format_condition(const char* label, double cond) {
    std::ostringstream os;
    os << label << "(kappa=" << cond << ")";
    return os.str();
}

}  // namespace

Matrix state_covariance_white(const LinearStateSystem& sys, double gamma0) {
    if (!(gamma0 > 0.0)) throw std::invalid_argument("state_covariance_white: gamma0 must be > 0");
    const Matrix q = gamma0 * sys.c() * sys.c().transpose();
    Matrix g = q;
    Matrix ak = sys.a();
    for (int it = 0; it < 64; ++it) {
        g += ak * g * ak.transpose();
        g = 0.5 * (g + g.transpose());
        ak = ak * ak;
        const double gn = g.norm();
        if (gn == 0.0) break;
        const double residual = (sys.a() * g * sys.a().transpose() + q - g).norm();
        if (residual <= 1e-13 * gn || ak.norm() == 0.0) break;
    }
    return g;
}

TruncatedSum<Matrix> state_covariance_general(const LinearStateSystem& sys,
                                              const AutocovarianceFunction& acvf,
                                              std::int64_t truncation) {
    const double s = sys.sigma_max_a();
    const double c2 = sys.c().squaredNorm();
    const double abs_sum = acvf.absolute_sum();
    TruncatedSum<Matrix> out;
    out.truncation = truncation > 0 ? truncation
                                    : auto_truncation(s, 2.0 * c2 * abs_sum, 1e-12 * acvf.gamma0() * std::max(c2, 1e-300));
    const Eigen::Index cols = out.truncation + 1;
    const Matrix k = krylov_columns(sys.a(), sys.c(), cols);
    Vector g(cols);
    for (Eigen::Index h = 0; h < cols; ++h) g(h) = acvf(h);
    // M = K H with H_{jk} = gamma(j - k); then G = M K^T.
    Matrix m = Matrix::Zero(k.rows(), cols);
    for (Eigen::Index col = 0; col < cols; ++col)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double gj = g(std::abs(j - col));
            if (gj != 0.0) m.col(col).noalias() += gj * k.col(j);
        }
    out.value = m * k.transpose();
    out.value = 0.5 * (out.value + out.value.transpose()).eval();
    out.tail_certificate = 2.0 * c2 * geometric_tail(s, out.truncation) * abs_sum;
    out.flagged = out.tail_certificate > 1e-8 * out.value.trace();
    return out;
}

TruncatedSum<Vector> cross_covariance(const LinearStateSystem& sys, const AutocovarianceFunction& acvf,
                                      int tau, std::int64_t truncation) {
    const double s = sys.sigma_max_a();
    const double cn = sys.c().norm();
    TruncatedSum<Vector> out;
    out.truncation = truncation > 0 ? truncation
                                    : auto_truncation(s, cn * acvf.gamma0(), 1e-12 * acvf.gamma0() * std::max(cn, 1e-300));
    Vector x = sys.c();
    out.value = Vector::Zero(sys.dim());
    for (std::int64_t j = 0; j <= out.truncation; ++j) {
        out.value += acvf(j + tau) * x;
        x = sys.a() * x;
    }
    out.tail_certificate = cn * geometric_tail(s, out.truncation) * acvf.gamma0();
    out.flagged = out.tail_certificate > 1e-8 * std::max(out.value.norm(), acvf.gamma0() * cn);
    return out;
}

namespace {

// White noise: Gamma = gamma0 K K^T and c(-m) = gamma0 K e_m, so
// MC_m = e_m^T K^T (K K^T)^+ K e_m, the squared norm of the projection of e_m
// onto the row space of K. The SVD of K conditions like sqrt(kappa(Gamma)).
void white_noise_capacities(const LinearStateSystem& sys, int tau_max,
                            std::int64_t truncation, CapacityReport& report) {
    const double s = sys.sigma_max_a();
    const double cn = sys.c().norm();
    const std::int64_t j = truncation > 0 ? truncation : auto_truncation(s, cn, 1e-17 * std::max(cn, 1e-300));
    const Eigen::Index cols = std::max<Eigen::Index>(j, tau_max) + 1;
    const Matrix k = krylov_columns(sys.a(), sys.c(), cols);
    Eigen::BDCSVD<Matrix> svd(k, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > 1e-10 * sv(0)) ++r;
    double cond = 1.0;
    if (r < sys.dim()) cond = std::numeric_limits<double>::infinity();
    else if (r > 0) cond = (sv(0) / sv(r - 1)) * (sv(0) / sv(r - 1));
    if (!(cond < 1e12)) report.flags.push_back(format_condition("singular_state_covariance", cond));
    const Matrix v = svd.matrixV().leftCols(r);
    report.mc_tau.resize(static_cast<std::size_t>(tau_max) + 1);
    for (int m = 0; m <= tau_max; ++m) report.mc_tau[m] = v.row(m).squaredNorm();
    report.fc_h.assign(static_cast<std::size_t>(tau_max), 0.0);
}

}  // namespace

CapacityReport analytic_capacities_linear(const LinearStateSystem& sys,
                                          const AutocovarianceFunction& acvf, int tau_max,
                                          std::int64_t truncation) {
    if (tau_max < 0) throw std::invalid_argument("analytic_capacities_linear: tau_max must be >= 0");
    CapacityReport report;
    report.estimator = EstimatorKind::analytic_linear;
    if (acvf.tail_bound(0) == 0.0) {
        white_noise_capacities(sys, tau_max, truncation, report);
        report.finalize();
        return report;
    }
    const Matrix g = covariance_for(sys, acvf, report.flags);
    const CovarianceFactor f = factor_covariance(g);
    if (f.singular) report.flags.push_back(format_condition("singular_state_covariance", f.condition));

    const double s = sys.sigma_max_a();
    const double cn = sys.c().norm();
    const std::int64_t j = truncation > 0
                               ? truncation
                               : auto_truncation(s, cn * acvf.gamma0(), 1e-14 * acvf.gamma0() * std::max(cn, 1e-300));
    // Columns beyond J still matter for white noise, where c(-m) = gamma0 A^m C.
    const Eigen::Index cols = std::max<Eigen::Index>(j, tau_max) + 1;
    const Matrix k = krylov_columns(sys.a(), sys.c(), cols);
    const double g0 = acvf.gamma0();

    auto cross = [&](int lag) {
        Vector c = Vector::Zero(k.rows());
        for (Eigen::Index col = 0; col < cols; ++col) {
            const double gv = acvf(col + lag);
            if (gv != 0.0) c.noalias() += gv * k.col(col);
        }
        return c;
    };
    report.mc_tau.resize(static_cast<std::size_t>(tau_max) + 1);
    report.fc_h.resize(static_cast<std::size_t>(tau_max));
    for (int m = 0; m <= tau_max; ++m)
        report.mc_tau[m] = (f.w.transpose() * cross(-m)).squaredNorm() / g0;
    for (int h = 1; h <= tau_max; ++h)
        report.fc_h[h - 1] = (f.w.transpose() * cross(h)).squaredNorm() / g0;
    report.finalize();
    return report;
}

namespace {

double memory_b_estimate(const LinearStateSystem& sys, const AutocovarianceFunction& acvf,
                         const Matrix& g_inv_sqrt, Eigen::Index window, Matrix* b_out,
                         double* h_condition) {
    const ToeplitzBlock h = toeplitz_block(acvf, window);
    const SymmetricRoots roots = symmetric_roots(h.entries);
    if (h_condition) {
        const double lo = roots.eigenvalues.minCoeff();
        *h_condition = lo > 0.0 ? roots.eigenvalues.maxCoeff() / lo
                                : std::numeric_limits<double>::infinity();
    }
    const Matrix k = krylov_columns(sys.a(), sys.c(), window);
    Matrix b = g_inv_sqrt * k * roots.sqrt;
    const double mc = (b * h.entries * b.transpose()).trace() / acvf.gamma0();
    if (b_out) *b_out = std::move(b);
    return mc;
}

}  // namespace

MemoryBVectors b_vectors_memory(const LinearStateSystem& sys, const AutocovarianceFunction& acvf,
                                Eigen::Index window) {
    if (window < 2) throw std::invalid_argument("b_vectors_memory: window must be >= 2");
    MemoryBVectors out;
    const Matrix g = covariance_for(sys, acvf, out.flags);
    const double cond = condition_number_symmetric(g);
    if (!(cond < 1e12))
        throw std::invalid_argument("b_vectors_memory: state covariance is singular; reduce the system first");
    const Matrix g_inv_sqrt = symmetric_roots(g).inv_sqrt;
    out.mc_estimate = memory_b_estimate(sys, acvf, g_inv_sqrt, window, &out.b, &out.toeplitz_condition);
    out.mc_half_window = memory_b_estimate(sys, acvf, g_inv_sqrt, window / 2, nullptr, nullptr);
    const auto n = sys.dim();
    out.orthonormality_error =
        (out.b * out.b.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(out.toeplitz_condition < 1e12))
        out.flags.push_back(format_condition("ill_conditioned_toeplitz", out.toeplitz_condition));
    return out;
}

ForecastBVectors b_vectors_forecasting(const LinearStateSystem& sys,
                                       const AutocovarianceFunction& acvf, Eigen::Index window) {
    if (window < 1) throw std::invalid_argument("b_vectors_forecasting: window must be >= 1");
    ForecastBVectors out;
    const Matrix g = covariance_for(sys, acvf, out.flags);
    const double cond = condition_number_symmetric(g);
    if (!(cond < 1e12))
        throw std::invalid_argument("b_vectors_forecasting: state covariance is singular; reduce the system first");
    const Matrix g_inv_sqrt = symmetric_roots(g).inv_sqrt;

    // Index j in [-L, L] lives at position j + L.
    const Eigen::Index size = 2 * window + 1;
    const ToeplitzBlock hbar = toeplitz_block(acvf, size);
    const SymmetricRoots roots = symmetric_roots(hbar.entries);
    const double hlo = roots.eigenvalues.minCoeff();
    if (!(hlo > 0.0 && roots.eigenvalues.maxCoeff() / hlo < 1e12))
        out.flags.push_back("ill_conditioned_toeplitz");

    // B_i^j = (G^{-1/2} sum_{k=0}^{L} A^k C Hbar^{1/2}_{-k, j})_i
    const Matrix k = krylov_columns(sys.a(), sys.c(), window + 1);
    Matrix rows_at_minus_k(window + 1, size);
    for (Eigen::Index kk = 0; kk <= window; ++kk) rows_at_minus_k.row(kk) = roots.sqrt.row(window - kk);
    const Matrix b = g_inv_sqrt * k * rows_at_minus_k;  // N x (2L+1)
    const auto n = sys.dim();
    out.orthonormality_error = (b * b.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();

    // (Hbar^{1/2} B_i)_tau for tau = 1..L, i.e. positions L+1..2L.
    const Matrix projected = roots.sqrt.middleRows(window + 1, window) * b.transpose();  // L x N
    out.fc_h.resize(static_cast<std::size_t>(window));
    const double g0 = acvf.gamma0();
    for (Eigen::Index t = 0; t < window; ++t) out.fc_h[t] = projected.row(t).squaredNorm() / g0;
    for (double v : out.fc_h) out.fc_estimate += v;

    out.analytic_fc = analytic_capacities_linear(sys, acvf, static_cast<int>(window)).fc_total;
    if (std::abs(out.analytic_fc - out.fc_estimate) > 1e-2) out.flags.push_back("window_truncation");
    return out;
}

Matrix controllability_matrix(const Matrix& a, const Vector& c) {
    return krylov_columns(a, c, a.rows());
}

Eigen::Index numerical_rank(const Matrix& m, std::optional<double> rel_threshold) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    const double rel = rel_threshold.value_or(static_cast<double>(std::max(m.rows(), m.cols())) *
                                              std::numeric_limits<double>::epsilon());
    const double cut = rel * sv(0);
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cut) ++r;
    return r;
}

ControllabilityReport controllability(const LinearStateSystem& sys, std::optional<double> rel_threshold) {
    ControllabilityReport out;
    out.r = controllability_matrix(sys.a(), sys.c());
    const auto n = sys.dim();
    if (n > 0) {
        Eigen::JacobiSVD<Matrix> svd(out.r);
        out.singular_values = svd.singularValues();
    }
    out.rank = numerical_rank(out.r, rel_threshold);
    const EigenDiagnostics d = eigen_diagnostics(sys.a());
    out.eigenvalues = d.values;
    out.eigen_distinct = d.distinct;
    out.eigen_nonzero = d.nonzero;
    out.diagonalizable = d.diagonalizable;
    out.kalman_full = out.rank == n && out.eigen_nonzero;
    if (d.diagonalizable && n > 0) {
        const Eigen::VectorXcd coeffs = d.vectors.partialPivLu().solve(sys.c().cast<std::complex<double>>());
        const double cut = 1e-8 * std::max(sys.c().norm(), 1e-300);
        out.coeffs_nonzero = (coeffs.cwiseAbs().array() > cut).all();
    } else if (n == 0) {
        out.coeffs_nonzero = true;
    }
    return out;
}

namespace {

KernelCheck compare_kernels(const Matrix& ker_g, const Matrix& ker_r) {
    KernelCheck out;
    out.covariance_kernel_dim = ker_g.cols();
    out.controllability_kernel_dim = ker_r.cols();
    if (ker_g.cols() != ker_r.cols()) return out;
    if (ker_g.cols() > 0) {
        const Matrix residual = ker_g - ker_r * (ker_r.transpose() * ker_g);
        Eigen::JacobiSVD<Matrix> svd(residual);
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            out.principal_angles.push_back(std::asin(std::min(1.0, svd.singularValues()(i))));
    }
    double largest = 0.0;
    for (double a : out.principal_angles) largest = std::max(largest, a);
    out.match = largest < 1e-6;
    return out;
}

}  // namespace

KernelCheck kernel_equality_check(const Matrix& gamma_x, const Matrix& r, double rel_threshold) {
    // Eigenvalues of G scale like squared singular values of R.
    return compare_kernels(symmetric_kernel_basis(gamma_x, rel_threshold * rel_threshold),
                           left_kernel_basis(r, rel_threshold));
}

KernelCheck kernel_equality_check(const LinearStateSystem& sys, double gamma0, double rel_threshold) {
    if (!(gamma0 > 0.0)) throw std::invalid_argument("kernel_equality_check: gamma0 must be > 0");
    const double s = sys.sigma_max_a();
    const std::int64_t j = auto_truncation(s, 1.0, 1e-17);
    const Matrix factor = std::sqrt(gamma0) * krylov_columns(sys.a(), sys.c(), std::max<Eigen::Index>(j + 1, sys.dim()));
    return compare_kernels(left_kernel_basis(factor, rel_threshold),
                           left_kernel_basis(controllability_matrix(sys.a(), sys.c()), rel_threshold));
}

ReducedSystem reduce_system(const LinearStateSystem& sys, std::optional<double> rel_threshold) {
    const Matrix r = controllability_matrix(sys.a(), sys.c());
    const Eigen::Index rank = numerical_rank(r, rel_threshold);
    ReducedSystem out;
    const auto n = sys.dim();
    if (rank == 0) {
        out.a_bar = Matrix(0, 0);
        out.c_bar = Vector(0);
        out.injection = Matrix(n, 0);
        return out;
    }
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU);
    Matrix q = svd.matrixU().leftCols(rank);
    for (Eigen::Index j = 0; j < rank; ++j)
        if (q.col(j).dot(sys.c()) < 0.0) q.col(j) *= -1.0;
    out.injection = q;
    out.a_bar = q.transpose() * sys.a() * q;
    out.c_bar = q.transpose() * sys.c();
    // Thresholds are relative, so rank comparison is scale free.
    const Matrix r_bar = controllability_matrix(out.a_bar, out.c_bar);
    const double rel = rel_threshold.value_or(static_cast<double>(n) * std::numeric_limits<double>::epsilon());
    out.rank_preserved = numerical_rank(r_bar, rel) == rank;
    const EigenDiagnostics d = eigen_diagnostics(out.a_bar);
    out.abar_diagonalizable = d.diagonalizable;
    out.abar_eigen_nonzero = d.nonzero;
    return out;
}

RankCapacity memory_capacity_via_rank(const LinearStateSystem& sys, std::optional<double> rel_threshold) {
    const ReducedSystem red = reduce_system(sys, rel_threshold);
    RankCapacity out;
    out.mc = red.rank();
    out.fc = 0;
    out.hypotheses_met = red.rank() == 0 || (red.abar_diagonalizable && red.abar_eigen_nonzero);
    return out;
}

}  // namespace rccap
