#include "rccap/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rccap {

namespace {

void require_square_with_input(const Matrix& a, const Vector& c, const char* what) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(what) + ": connectivity matrix must be square");
    if (c.size() != a.rows())
        throw std::invalid_argument(std::string(what) + ": input vector length must match A");
    if (!a.allFinite() || !c.allFinite())
        throw std::invalid_argument(std::string(what) + ": parameters must be finite");
}

}  // namespace

LinearStateSystem::LinearStateSystem(Matrix a, Vector c)
    : a_(std::move(a)), c_(std::move(c)) {
    require_square_with_input(a_, c_, "LinearStateSystem");
    sigma_max_ = sigma_max(a_);
    if (!(sigma_max_ < 1.0))
        throw std::invalid_argument("LinearStateSystem: sigma_max(A) must be < 1, got " +
                                    std::to_string(sigma_max_));
}

std::string to_string(Activation act) {
    switch (act) {
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

EchoStateNetwork::EchoStateNetwork(Matrix a, Vector c, Vector zeta, Activation act)
    : a_(std::move(a)), c_(std::move(c)), zeta_(std::move(zeta)), act_(act) {
    require_square_with_input(a_, c_, "EchoStateNetwork");
    if (zeta_.size() != a_.rows())
        throw std::invalid_argument("EchoStateNetwork: bias length must match A");
    sigma_max_ = sigma_max(a_);
    if (!(sigma_max_ < 1.0))
        throw std::invalid_argument("EchoStateNetwork: sigma_max(A) must be < 1, got " +
                                    std::to_string(sigma_max_));
}

Vector EchoStateNetwork::step(const Vector& x, double z) const {
    Vector pre = a_ * x + c_ * z + zeta_;
    if (act_ == Activation::tanh) pre = pre.array().tanh();
    return pre;
}

ConjugateSystem::ConjugateSystem(const StateSystem& base, AffineMap forward, AffineMap inverse)
    : base_(base.clone()), forward_(std::move(forward)), inverse_(std::move(inverse)) {
    if (forward_.linear.cols() != base_->dim() || inverse_.linear.rows() != base_->dim() ||
        forward_.linear.rows() != inverse_.linear.cols())
        throw std::invalid_argument("ConjugateSystem: map dimensions do not match the system");
    lipschitz_ = sigma_max(forward_.linear) * sigma_max(inverse_.linear) * base_->lipschitz_constant();
}

ConjugateSystem::ConjugateSystem(const ConjugateSystem& other)
    : base_(other.base_->clone()),
      forward_(other.forward_),
      inverse_(other.inverse_),
      lipschitz_(other.lipschitz_) {}

double contraction_constant(const LinearStateSystem& sys) { return sys.sigma_max_a(); }

// Both activations on the menu are 1-Lipschitz.
double contraction_constant(const EchoStateNetwork& sys) { return sys.lipschitz_constant(); }

FilterRun run_filter(const StateSystem& sys, std::span<const double> inputs, std::size_t washout,
                     const std::optional<Vector>& initial) {
    if (inputs.size() <= washout)
        throw std::invalid_argument("run_filter: need more inputs than washout steps");
    for (double z : inputs)
        if (!std::isfinite(z)) throw std::invalid_argument("run_filter: nonfinite input");
    const auto n = sys.dim();
    Vector x = initial ? *initial : Vector::Zero(n);
    if (x.size() != n) throw std::invalid_argument("run_filter: initial state has wrong dimension");

    FilterRun run;
    run.washout = washout;
    run.states.resize(static_cast<Eigen::Index>(inputs.size() - washout), n);
    run.inputs.assign(inputs.begin() + static_cast<std::ptrdiff_t>(washout), inputs.end());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        x = sys.step(x, inputs[t]);
        if (t >= washout) run.states.row(static_cast<Eigen::Index>(t - washout)) = x.transpose();
    }
    return run;
}

EspReport verify_esp_convergence(const StateSystem& sys, std::span<const double> inputs,
                                 int trials, std::uint64_t seed) {
    if (trials < 2) throw std::invalid_argument("verify_esp_convergence: need at least 2 trials");
    const auto n = sys.dim();
    Rng rng(seed);
    std::vector<Vector> x;
    x.reserve(static_cast<std::size_t>(trials));
    for (int k = 0; k < trials; ++k) x.emplace_back(random_gaussian(static_cast<int>(n), 1, rng));

    auto max_gap = [&] {
        double g = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = i + 1; j < x.size(); ++j) g = std::max(g, (x[i] - x[j]).norm());
        return g;
    };

    EspReport report;
    report.contraction = sys.lipschitz_constant();
    report.initial_gap = max_gap();

    // Least-squares fit of log(gap_t) = a + t log(rate) over gaps above round-off.
    const double floor = 1e-12 * std::max(report.initial_gap, 1e-300);
    double st = 0, sl = 0, stt = 0, stl = 0;
    int count = 0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        for (auto& xi : x) xi = sys.step(xi, inputs[t]);
        const double g = max_gap();
        report.max_final_gap = g;
        if (g > floor) {
            const double tt = static_cast<double>(t + 1);
            const double lg = std::log(g);
            st += tt;
            sl += lg;
            stt += tt * tt;
            stl += tt * lg;
            ++count;
        }
    }
    if (count >= 2) {
        const double slope = (count * stl - st * sl) / (count * stt - st * st);
        report.rate_estimate = std::exp(slope);
    } else {
        report.rate_estimate = 0.0;
    }
    report.flagged = report.rate_estimate > report.contraction + 0.05;
    return report;
}

Standardization standardize(const StateSystem& sys, const Vector& mu, const Matrix& gamma_x) {
    const auto n = sys.dim();
    if (mu.size() != n || gamma_x.rows() != n || gamma_x.cols() != n)
        throw std::invalid_argument("standardize: mean/covariance dimensions do not match the system");
    const double scale = std::max(gamma_x.cwiseAbs().maxCoeff(), 1e-300);
    if ((gamma_x - gamma_x.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("standardize: covariance matrix is not symmetric");
    const SymmetricRoots roots = symmetric_roots(gamma_x);
    const double lo = roots.eigenvalues.minCoeff();
    const double hi = roots.eigenvalues.maxCoeff();
    if (!(lo > 1e-10 * hi))
        throw std::invalid_argument(
            "standardize: state covariance is singular; reduce the system to the span of its "
            "controllability matrix first");
    AffineMap map{roots.inv_sqrt, -(roots.inv_sqrt * mu)};
    AffineMap inverse{roots.sqrt, mu};
    ConjugateSystem conj(sys, map, inverse);
    return Standardization{std::move(conj), std::move(map), std::move(inverse)};
}

MorphismCheck verify_morphism(const AffineMap& f, const StateSystem& sys1, const StateSystem& sys2,
                              int probes, std::uint64_t seed) {
    if (f.linear.cols() != sys1.dim() || f.linear.rows() != sys2.dim() ||
        f.offset.size() != sys2.dim())
        throw std::invalid_argument("verify_morphism: map dimensions do not match the systems");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MorphismCheck out;
    for (int p = 0; p < probes; ++p) {
        const Vector x = random_gaussian(static_cast<int>(sys1.dim()), 1, rng);
        const double z = normal(rng);
        const Vector lhs = f(sys1.step(x, z));
        const Vector rhs = sys2.step(f(x), z);
        const double residual = (lhs - rhs).norm();
        ++out.probes_checked;
        if (!(residual <= 1e-9 * (1.0 + x.norm()))) {
            out.holds = false;
            out.witness = MorphismCheck::Witness{x, z, residual};
            break;
        }
    }
    return out;
}

}  // namespace rccap
