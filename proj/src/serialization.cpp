#include "kam/serialization.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <limits>

#include "kam/error.hpp"

namespace kam {

namespace {

Json index_json(const Index& n, int dim) {
  Json a = Json::array();
  for (int j = 0; j < dim; ++j) a.push_back(n[j]);
  return a;
}

Index index_from_json(const Json& j, int dim) {
  require(j.is_array() && static_cast<int>(j.size()) == dim, ErrorKind::Parse, "multi-index has wrong length");
  Index n{};
  for (int k = 0; k < dim; ++k) n[k] = j[k].get<int>();
  return n;
}

Json modes_json(const TrigPolynomial& f) {
  Json modes = Json::array();
  for (const auto& [n, c] : f.coeffs()) {
    if (!is_canonical(n)) continue;
    modes.push_back({{"n", index_json(n, f.dim())}, {"re", c.real()}, {"im", c.imag()}});
  }
  return modes;
}

TrigPolynomial modes_from_json(const Json& modes, int dim, int cutoff) {
  TrigPolynomial f(dim, cutoff);
  bool full = false;
  for (const auto& m : modes)
    if (!is_canonical(index_from_json(m.at("n"), dim))) full = true;
  for (const auto& m : modes) {
    const Index n = index_from_json(m.at("n"), dim);
    const Complex c(m.at("re").get<double>(), m.value("im", 0.0));
    require(linf(n) <= cutoff, ErrorKind::Parse, "mode beyond declared cutoff");
    if (full) {
      f.set(n, c);
    } else {
      f.set_real_pair(n, c);
    }
  }
  return f;
}

}  // namespace

Json to_json(const TrigPolynomial& f) {
  return {{"dim", f.dim()}, {"cutoff", f.cutoff()}, {"modes", modes_json(f)}};
}

TrigPolynomial trig_from_json(const Json& j) {
  try {
    return modes_from_json(j.at("modes"), j.at("dim").get<int>(), j.at("cutoff").get<int>());
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, e.what());
  }
}

Json to_json(const FourierTaylor& f) {
  Json terms = Json::array();
  for (const auto& [a, fa] : f.terms()) terms.push_back({{"a", index_json(a, f.dim())}, {"modes", modes_json(fa)}});
  return {{"dim", f.dim()}, {"action_degree", f.degree()}, {"cutoff", f.cutoff()}, {"terms", terms}};
}

FourierTaylor fourier_taylor_from_json(const Json& j, double width) {
  try {
    const int dim = j.at("dim").get<int>();
    FourierTaylor f(dim, j.at("action_degree").get<int>(), j.at("cutoff").get<int>(), width);
    for (const auto& t : j.at("terms")) f.add_term(index_from_json(t.at("a"), dim), modes_from_json(t.at("modes"), dim, f.cutoff()));
    return f;
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, e.what());
  }
}

Json to_json(const NearlyIntegrable& problem) {
  Json P = Json::array();
  for (const auto& Pi : problem.P) P.push_back(to_json(Pi));
  return {{"H0", to_json(problem.H0)},
          {"P", P},
          {"V", {{"center", problem.V.center}, {"radius", problem.V.radius}}},
          {"eps0", problem.eps0}};
}

NearlyIntegrable problem_from_json(const Json& j) {
  try {
    NearlyIntegrable p;
    p.H0 = fourier_taylor_from_json(j.at("H0"));
    for (const auto& Pi : j.at("P")) {
      p.P.push_back(fourier_taylor_from_json(Pi));
      require(p.P.back().dim() == p.H0.dim(), ErrorKind::DimensionMismatch, "perturbation dimension differs from H0");
    }
    p.V.center = j.at("V").at("center").get<std::vector<double>>();
    p.V.radius = j.at("V").at("radius").get<double>();
    p.eps0 = j.value("eps0", 1.0);
    require(static_cast<int>(p.V.center.size()) == p.H0.dim(), ErrorKind::DimensionMismatch, "V center dimension");
    require(p.V.radius > 0.0, ErrorKind::Parse, "V radius must be positive");
    return p;
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, e.what());
  }
}

Json to_json(const TrigVector& v) {
  Json a = Json::array();
  for (const auto& f : v) a.push_back(to_json(f));
  return a;
}

TrigVector trig_vector_from_json(const Json& j) {
  require(j.is_array(), ErrorKind::Parse, "trig vector must be an array");
  TrigVector v;
  for (const auto& f : j) v.push_back(trig_from_json(f));
  return v;
}

Json to_json(const StepReport& r) {
  return {{"iteration", r.iteration},
          {"scale", r.scale},
          {"norm_P_in", r.norm_P_in},
          {"norm_P_out", r.norm_P_out},
          {"width_in", r.width_in},
          {"width_loss", r.width_loss},
          {"worst_divisor", r.worst_divisor},
          {"condition", r.condition},
          {"truncation_residual", r.truncation_residual},
          {"first_order_stray", r.first_order_stray}};
}

Json to_json(const TorusResult& t) {
  Json history = Json::array();
  for (const auto& r : t.history) history.push_back(to_json(r));
  return {{"omega", t.omega},
          {"eps", t.eps},
          {"anchor", t.anchor},
          {"u_star", to_json(t.u_star)},
          {"alpha_star", to_json(t.alpha_star)},
          {"graph", to_json(t.graph)},
          {"history", history},
          {"final_norm", t.final_norm},
          {"target_norm", t.target_norm},
          {"invariance_error", t.invariance_error},
          {"invariance_tolerance", t.invariance_tolerance},
          {"min_jacobian_det", t.min_jacobian_det},
          {"graph_consistency", t.graph_consistency},
          {"converged", t.converged},
          {"verified", t.verified},
          {"success", t.success},
          {"status", t.status}};
}

TorusResult torus_from_json(const Json& j) {
  try {
    TorusResult t;
    t.omega = j.at("omega").get<std::vector<double>>();
    t.eps = j.at("eps").get<double>();
    t.anchor = j.value("anchor", std::vector<double>{});
    t.u_star = trig_vector_from_json(j.at("u_star"));
    t.alpha_star = trig_vector_from_json(j.at("alpha_star"));
    if (j.contains("graph")) t.graph = trig_vector_from_json(j.at("graph"));
    t.final_norm = j.value("final_norm", 0.0);
    t.target_norm = j.value("target_norm", 0.0);
    t.invariance_error = j.value("invariance_error", 0.0);
    t.invariance_tolerance = j.value("invariance_tolerance", 1e-8);
    t.min_jacobian_det = j.value("min_jacobian_det", 1.0);
    t.graph_consistency = j.value("graph_consistency", 0.0);
    t.converged = j.value("converged", false);
    t.verified = j.value("verified", false);
    t.success = j.value("success", false);
    t.status = j.value("status", std::string());
    const auto d = t.omega.size();
    require(t.u_star.size() == d && t.alpha_star.size() == d, ErrorKind::DimensionMismatch, "torus component count");
    return t;
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, e.what());
  }
}

Json to_json(const LindstedtSeries& s) {
  Json orders = Json::array();
  for (const auto& o : s.orders) orders.push_back({{"u", to_json(o.u)}, {"alpha", to_json(o.alpha)}});
  Json radius = std::isfinite(s.radius_estimate) ? Json(s.radius_estimate) : Json(nullptr);
  if (std::isinf(s.radius_estimate)) radius = "inf";
  return {{"omega", s.omega},
          {"cutoff", s.cutoff},
          {"worst_divisor", s.worst_divisor},
          {"radius_estimate", radius},
          {"orders", orders}};
}

LindstedtSeries series_from_json(const Json& j) {
  try {
    LindstedtSeries s;
    s.omega = j.at("omega").get<std::vector<double>>();
    s.cutoff = j.at("cutoff").get<int>();
    s.worst_divisor = j.value("worst_divisor", s.worst_divisor);
    const Json& r = j.at("radius_estimate");
    if (r.is_number()) s.radius_estimate = r.get<double>();
    if (r.is_string()) s.radius_estimate = std::numeric_limits<double>::infinity();
    for (const auto& o : j.at("orders"))
      s.orders.push_back({trig_vector_from_json(o.at("u")), trig_vector_from_json(o.at("alpha"))});
    return s;
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, e.what());
  }
}

Json to_json(const KolmogorovSetReport& r) {
  Json anchors = Json::array();
  for (const auto& a : r.anchors) {
    Json e = {{"anchor", a.anchor},
              {"omega", a.omega},
              {"status", to_string(a.status)},
              {"dio_margin", a.dio_margin},
              {"iterations", a.iterations},
              {"final_norm", a.final_norm},
              {"min_jacobian_det", a.min_jacobian_det}};
    if (!a.error.empty()) e["error"] = a.error;
    if (a.invariance_error >= 0.0) e["invariance_error"] = a.invariance_error;
    anchors.push_back(std::move(e));
  }
  return {{"eps", r.eps},
          {"gamma", r.gamma},
          {"q", r.q},
          {"attempted", r.attempted},
          {"succeeded", r.succeeded},
          {"excluded", r.excluded},
          {"failed", r.failed},
          {"unanalyzed", r.unanalyzed},
          {"sampled_measure", r.sampled_measure},
          {"excluded_measure", r.excluded_measure},
          {"failed_measure", r.failed_measure},
          {"unanalyzed_measure", r.unanalyzed_measure},
          {"lipschitz", r.lipschitz},
          {"lipschitz_benchmark", r.lipschitz_benchmark},
          {"complement", r.complement},
          {"complement_stderr", r.complement_stderr},
          {"worst_flow_error", r.worst_flow_error},
          {"flow_consistent", r.flow_consistent},
          {"anchors", anchors}};
}

Json build_info() {
  return {{"library", "kamforge"},
          {"version", "1.0.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"fftw", std::string(fftw_version)},
          {"compiler", __VERSION__}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Parse, "cannot write " + path);
  out << j.dump(2) << '\n';
}

NearlyIntegrable load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

}  // namespace kam
