#include "rccap/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rccap {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = j.at(i);
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument("matrix rows must be arrays of equal length");
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!row.at(c).is_number()) throw std::invalid_argument("matrix entries must be numbers");
            m(i, c) = row.at(c).get<double>();
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("vector must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!j.at(i).is_number()) throw std::invalid_argument("vector entries must be numbers");
        v(i) = j.at(i).get<double>();
    }
    return v;
}

Json system_to_json(const StateSystem& sys) {
    if (const auto* lin = dynamic_cast<const LinearStateSystem*>(&sys))
        return {{"type", "linear"}, {"A", matrix_to_json(lin->a())}, {"C", vector_to_json(lin->c())}};
    if (const auto* esn = dynamic_cast<const EchoStateNetwork*>(&sys))
        return {{"type", "esn"},
                {"A", matrix_to_json(esn->a())},
                {"C", vector_to_json(esn->c())},
                {"zeta", vector_to_json(esn->zeta())},
                {"activation", to_string(esn->activation())}};
    throw std::invalid_argument("system_to_json: only linear and esn systems are serializable");
}

namespace {

const Json& field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name))
        throw std::invalid_argument(std::string("system document is missing '") + name + "'");
    return j.at(name);
}

}  // namespace

LinearStateSystem linear_system_from_json(const Json& j) {
    const Json& type = field(j, "type");
    if (!type.is_string() || type.get<std::string>() != "linear")
        throw std::invalid_argument("expected a system of type 'linear'");
    return LinearStateSystem(matrix_from_json(field(j, "A")), vector_from_json(field(j, "C")));
}

std::unique_ptr<StateSystem> system_from_json(const Json& j) {
    const Json& type = field(j, "type");
    if (!type.is_string()) throw std::invalid_argument("system type must be a string");
    const std::string name = type.get<std::string>();
    if (name == "linear") return std::make_unique<LinearStateSystem>(linear_system_from_json(j));
    if (name == "esn") {
        Matrix a = matrix_from_json(field(j, "A"));
        Vector c = vector_from_json(field(j, "C"));
        Vector zeta = j.contains("zeta") ? vector_from_json(j.at("zeta")) : Vector::Zero(a.rows());
        const Activation act = j.contains("activation")
                                   ? activation_from_string(j.at("activation").get<std::string>())
                                   : Activation::tanh;
        return std::make_unique<EchoStateNetwork>(std::move(a), std::move(c), std::move(zeta), act);
    }
    throw std::invalid_argument("unknown system type '" + name + "'");
}

Json to_json(const CapacityReport& report) {
    return {{"mc_tau", report.mc_tau},
            {"fc_h", report.fc_h},
            {"mc_total", report.mc_total},
            {"fc_total", report.fc_total},
            {"truncation_tail_estimate", report.truncation_tail_estimate},
            {"fc_truncation_tail_estimate", report.fc_truncation_tail_estimate},
            {"estimator", to_string(report.estimator)},
            {"flags", report.flags}};
}

Json to_json(const BoundsReport& report) {
    return {{"n", report.n},
            {"gamma0", report.gamma0},
            {"rho_bound", report.rho_bound},
            {"spectral_bound", report.spectral_bound},
            {"gershgorin", report.gershgorin},
            {"rho_order", report.rho_order},
            {"rho_converged", report.rho_converged},
            {"flags", report.flags}};
}

Json to_json(const ControllabilityReport& report) {
    Json eig = Json::array();
    for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i)
        eig.push_back({report.eigenvalues(i).real(), report.eigenvalues(i).imag()});
    return {{"R", matrix_to_json(report.r)},
            {"rank", report.rank},
            {"kalman_full", report.kalman_full},
            {"eigen_distinct", report.eigen_distinct},
            {"eigen_nonzero", report.eigen_nonzero},
            {"diagonalizable", report.diagonalizable},
            {"coeffs_nonzero", report.coeffs_nonzero ? Json(*report.coeffs_nonzero) : Json(nullptr)},
            {"singular_values", vector_to_json(report.singular_values)},
            {"eigenvalues", eig}};
}

Json to_json(const ReducedSystem& reduced) {
    return {{"rank", reduced.rank()},
            {"A_bar", matrix_to_json(reduced.a_bar)},
            {"C_bar", vector_to_json(reduced.c_bar)},
            {"injection", matrix_to_json(reduced.injection)},
            {"abar_diagonalizable", reduced.abar_diagonalizable},
            {"abar_eigen_nonzero", reduced.abar_eigen_nonzero},
            {"rank_preserved", reduced.rank_preserved}};
}

Json to_json(const ArmaProcessSpec& spec) {
    return {{"phi", spec.phi}, {"theta", spec.theta}, {"sigma", spec.sigma}};
}

ArmaProcessSpec arma_from_json(const Json& j) {
    ArmaProcessSpec spec;
    spec.phi = j.value("phi", 0.0);
    spec.theta = j.value("theta", 0.0);
    spec.sigma = j.value("sigma", 1.0);
    spec.validate();
    return spec;
}

std::string csv_header() {
    return "model,phi,theta,mc,fc,bound_rho,bound_spectral,bound_gershgorin,flags";
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_row(const std::string& model, double phi, double theta, const CapacityReport& report,
                    const BoundsReport& bounds, const std::vector<std::string>& extra_flags) {
    std::string flags;
    auto append = [&flags](const std::string& f) {
        if (!flags.empty()) flags += ';';
        for (char ch : f) flags += ch == ',' ? ' ' : ch;
    };
    for (const auto& f : report.flags) append(f);
    for (const auto& f : bounds.flags) append(f);
    for (const auto& f : extra_flags) append(f);
    std::string line = model;
    for (double v : {phi, theta, report.mc_total, report.fc_total, bounds.rho_bound,
                     bounds.spectral_bound, bounds.gershgorin}) {
        line += ',';
        line += format_number(v);
    }
    line += ',';
    line += flags;
    return line;
}

}  // namespace rccap
