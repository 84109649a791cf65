#pragma once

// JSON documents for systems and reports, and the CSV row format of the
// experiment runner. Matrices are written as row-major nested arrays.

#include "rccap/capacity.hpp"
#include "rccap/lincap.hpp"
#include "rccap/systems.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace rccap {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// {"type": "linear", "A": [[...]], "C": [...]} or
/// {"type": "esn", "A", "C", "zeta", "activation": "tanh" | "identity"}.
/// Conjugate systems are not serializable and throw std::invalid_argument.
Json system_to_json(const StateSystem& sys);

/// Throws std::invalid_argument on unknown types, missing fields or shapes
/// that the system constructors reject.
std::unique_ptr<StateSystem> system_from_json(const Json& j);
LinearStateSystem linear_system_from_json(const Json& j);

Json to_json(const CapacityReport& report);
Json to_json(const BoundsReport& report);
Json to_json(const ControllabilityReport& report);
Json to_json(const ReducedSystem& reduced);
Json to_json(const ArmaProcessSpec& spec);
ArmaProcessSpec arma_from_json(const Json& j);

/// `model,phi,theta,mc,fc,bound_rho,bound_spectral,bound_gershgorin,flags`
std::string csv_header();

/// One CSV line (no trailing newline). Numbers use 10 significant digits;
/// flags are joined with ';'.
std::string csv_row(const std::string& model, double phi, double theta, const CapacityReport& report,
                    const BoundsReport& bounds, const std::vector<std::string>& extra_flags = {});

std::string format_number(double v);

}  // namespace rccap
