#pragma once

#include <json.hpp>
#include <string>

#include "kam/fourier_taylor.hpp"
#include "kam/hamiltonian.hpp"
#include "kam/kolmogorov_set.hpp"
#include "kam/lindstedt.hpp"
#include "kam/newton_scheme.hpp"

namespace kam {

using Json = nlohmann::json;

/// {"dim", "action_degree", "cutoff", "terms": [{"a", "modes": [{"n", "re", "im"}]}]}.
/// Only modes with n >= -n lexicographically are written.
Json to_json(const FourierTaylor& f);
/// Accepts either the half-spectrum or the full-spectrum convention.
FourierTaylor fourier_taylor_from_json(const Json& j, double width = 1.0);

Json to_json(const TrigPolynomial& f);
TrigPolynomial trig_from_json(const Json& j);

/// {"H0": series, "P": [series per eps order], "V": {"center", "radius"}, "eps0"}
Json to_json(const NearlyIntegrable& problem);
NearlyIntegrable problem_from_json(const Json& j);
/// Throws Parse with the path in the message when the file is missing or malformed.
NearlyIntegrable load_problem(const std::string& path);

Json to_json(const TrigVector& v);
TrigVector trig_vector_from_json(const Json& j);

Json to_json(const StepReport& r);

/// Everything except the composed map, which is not serialized.
Json to_json(const TorusResult& t);
/// Reads omega, eps, anchor, u*, alpha*, graph and the scalar diagnostics.
TorusResult torus_from_json(const Json& j);

Json to_json(const LindstedtSeries& s);
LindstedtSeries series_from_json(const Json& j);

Json to_json(const KolmogorovSetReport& r);

/// Library name and version plus the versions of Eigen, Boost and FFTW it was built with.
Json build_info();

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace kam
