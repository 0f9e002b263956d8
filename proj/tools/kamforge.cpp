#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kam/diophantine.hpp"
#include "kam/error.hpp"
#include "kam/kolmogorov_set.hpp"
#include "kam/lindstedt.hpp"
#include "kam/newton_scheme.hpp"
#include "kam/serialization.hpp"

namespace {

using kam::ErrorKind;
using kam::Json;

enum Exit { Ok = 0, Config = 1, Divergence = 2, Resonance = 3, VerificationFailure = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DivergenceDetected:
    case ErrorKind::BudgetExceeded:
    case ErrorKind::StripOverflow:
      return Divergence;
    case ErrorKind::ResonantDivisor:
    case ErrorKind::ExactResonance:
    case ErrorKind::SecularTerm:
      return Resonance;
    case ErrorKind::DomainExit:
    case ErrorKind::ToleranceFailure:
      return VerificationFailure;
    default:
      return Config;
  }
}

/// Round-trippable and locale-free, so CSV bytes depend only on the values.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

struct Numerics {
  std::string problem;
  std::vector<double> anchor;
  double gamma = -1.0;
  double tau = 1.0;
  int cutoff = 16;
  int degree = 4;
  kam::Schedule schedule;
  int workers = 1;
  std::uint64_t seed = 1;

  Json echo() const {
    return {{"problem", problem},
            {"anchor", anchor},
            {"gamma", gamma},
            {"tau", tau},
            {"cutoff", cutoff},
            {"degree", degree},
            {"xi", schedule.xi},
            {"xi_star", schedule.xi_star},
            {"rho", schedule.rho},
            {"max_iterations", schedule.max_iterations},
            {"target_norm", schedule.target_norm},
            {"workers", workers},
            {"seed", seed}};
  }
};

void add_schedule(CLI::App* app, Numerics& n) {
  app->add_option("--xi", n.schedule.xi, "initial analyticity width");
  app->add_option("--xi-star", n.schedule.xi_star, "final analyticity width");
  app->add_option("--rho", n.schedule.rho, "action radius of the norms");
  app->add_option("--max-iterations", n.schedule.max_iterations);
  app->add_option("--target", n.schedule.target_norm, "stop norm (negative: relative default)");
}

void add_local(CLI::App* app, Numerics& n, bool needs_anchor) {
  app->add_option("--problem", n.problem, "problem JSON file")->required();
  auto* a = app->add_option("--anchor", n.anchor, "anchor action y");
  if (needs_anchor) a->required();
  app->add_option("--gamma", n.gamma, "Diophantine constant (default: margin of the anchor frequency)");
  app->add_option("--tau", n.tau, "Diophantine exponent");
  app->add_option("--cutoff", n.cutoff, "Fourier cutoff N");
  app->add_option("--degree", n.degree, "action degree D");
  add_schedule(app, n);
}

/// The default gamma is the anchor frequency's own margin, shaved so the check passes.
double resolve_gamma(const Numerics& n, const std::vector<double>& omega) {
  if (n.gamma > 0.0) return n.gamma;
  return kam::max_gamma(omega, n.tau, n.cutoff) * (1.0 - 1e-9);
}

kam::LocalizedProblem load_local(const Numerics& n) {
  const auto problem = kam::load_problem(n.problem);
  kam::require(static_cast<int>(n.anchor.size()) == problem.dim(), ErrorKind::DimensionMismatch,
               "anchor has " + std::to_string(n.anchor.size()) + " components, problem dimension is " +
                   std::to_string(problem.dim()));
  return kam::localize(problem, n.anchor, n.schedule.xi, n.schedule.rho, n.cutoff, n.degree);
}

Json localization_json(const Numerics& n) {
  return {{"anchor", n.anchor}, {"width", n.schedule.xi}, {"rho", n.schedule.rho}, {"cutoff", n.cutoff},
          {"degree", n.degree}};
}

class Manifest {
 public:
  Manifest(std::string command, Json config) : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["config"] = std::move(config);
    doc_["build"] = kam::build_info();
    doc_["outputs"] = Json::array();
  }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  Json& results() { return doc_["results"]; }
  void write(const std::string& beside, int code) {
    doc_["exit_code"] = code;
    doc_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    kam::write_json_file(beside + ".manifest.json", doc_);
  }

 private:
  std::chrono::steady_clock::time_point start_;
  Json doc_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) kam::fail(ErrorKind::Parse, "cannot write " + path);
  out << text;
}

int cmd_torus(const Numerics& n, const std::string& out, const kam::RunOptions& options, double eps) {
  Manifest manifest("torus", n.echo());
  manifest.results()["eps"] = eps;
  const auto loc = load_local(n);
  const double gamma = resolve_gamma(n, loc.omega());
  const auto t = kam::run(loc, eps, gamma, n.tau, n.schedule, options);
  Json j = kam::to_json(t);
  j["gamma"] = gamma;
  j["tau"] = n.tau;
  j["localization"] = localization_json(n);
  kam::write_json_file(out, j);
  manifest.output(out);
  std::cout << "status " << t.status << "  iterations " << t.history.size() << "  final_norm " << t.final_norm
            << "  invariance_error " << t.invariance_error << '\n';
  int code = Ok;
  if (!t.success) code = t.status == "verification failed" ? VerificationFailure : Divergence;
  manifest.results()["status"] = t.status;
  manifest.write(out, code);
  return code;
}

int cmd_lindstedt(const Numerics& n, const std::string& out, int orders, const std::vector<double>& eps_list) {
  Manifest manifest("lindstedt", n.echo());
  const auto loc = load_local(n);
  const double gamma = resolve_gamma(n, loc.omega());
  auto series = kam::expand(loc, gamma, n.tau, orders);
  kam::write_json_file(out, kam::to_json(series));
  manifest.output(out);
  Json residuals = Json::array();
  for (double eps : eps_list) {
    const double r = kam::residual(series, loc, eps);
    residuals.push_back({{"eps", eps}, {"residual", r}});
    std::cout << "eps " << eps << "  residual " << r << '\n';
  }
  manifest.results()["residuals"] = residuals;
  manifest.results()["radius_estimate"] =
      std::isfinite(series.radius_estimate) ? Json(series.radius_estimate) : Json(nullptr);
  std::cout << "orders " << series.max_order() << "  radius_estimate " << series.radius_estimate << '\n';
  manifest.write(out, Ok);
  return Ok;
}

int cmd_measure(const std::string& problem, std::vector<double> lo, std::vector<double> hi,
                const std::vector<double>& gammas, double tau, int dio_cutoff, long samples, const std::string& method,
                std::uint64_t seed, const std::string& out) {
  Json config = {{"problem", problem}, {"lo", lo}, {"hi", hi}, {"gammas", gammas}, {"tau", tau},
                 {"dio_cutoff", dio_cutoff}, {"samples", samples}, {"method", method}, {"seed", seed}};
  kam::require(method == "mc" || method == "grid", ErrorKind::InvalidArgument, "method must be mc or grid");
  kam::require(!gammas.empty(), ErrorKind::InvalidArgument, "empty gamma list");
  kam::FrequencyDomain domain;
  if (!problem.empty()) {
    kam::require(lo.empty() && hi.empty(), ErrorKind::InvalidArgument, "give either --problem or --lo/--hi");
    const auto p = kam::load_problem(problem);
    domain = kam::frequency_domain(p.H0, p.V);
  } else {
    kam::require(!lo.empty() && lo.size() == hi.size(), ErrorKind::InvalidArgument,
                 "--lo and --hi must have the same nonzero length");
    domain = {lo, hi};
  }
  const int cutoff = dio_cutoff > 0 ? dio_cutoff : kam::default_diophantine_cutoff(domain.dim());
  for (double g : gammas) kam::DiophantineParams{g, tau, cutoff}.validate(domain.dim());
  Manifest manifest("measure", config);
  const auto how = method == "mc" ? kam::SamplingMethod::MonteCarlo : kam::SamplingMethod::Grid;
  std::string csv = "gamma,estimate,stderr,analytic_bound,samples\n";
  std::vector<double> xs, ys;
  for (double g : gammas) {
    const auto e = kam::measure_complement(domain, {g, tau, cutoff}, how, samples, seed);
    csv += num(e.gamma) + "," + num(e.estimate) + "," + num(e.stderr_) + "," + num(e.analytic_bound) + "," +
           std::to_string(e.samples) + "\n";
    if (e.estimate > 0.0) {
      xs.push_back(g);
      ys.push_back(e.estimate);
    }
  }
  write_text(out, csv);
  manifest.output(out);
  std::cout << csv;
  if (xs.size() >= 2) {
    const double s = slope(xs, ys);
    manifest.results()["slope"] = s;
    std::cout << "slope vs gamma " << s << '\n';
  }
  manifest.write(out, Ok);
  return Ok;
}

int cmd_kamset(const std::string& problem_path, const std::vector<double>& eps_list, kam::PipelineConfig cfg,
               const std::string& out, std::string csv_path) {
  if (csv_path.empty()) csv_path = std::filesystem::path(out).replace_extension(".csv").string();
  Json config = {{"problem", problem_path}, {"eps", eps_list}, {"q", cfg.q}, {"tau", cfg.tau},
                 {"dio_cutoff", cfg.dio_cutoff}, {"ball_radius", cfg.ball_radius}, {"anchors", cfg.anchors},
                 {"anchors_per_axis", cfg.anchors_per_axis}, {"cutoff", cfg.cutoff}, {"degree", cfg.degree},
                 {"xi", cfg.schedule.xi}, {"xi_star", cfg.schedule.xi_star}, {"rho", cfg.schedule.rho},
                 {"flow_checks", cfg.flow_checks}, {"workers", cfg.workers}, {"seed", cfg.seed}};
  kam::require(!eps_list.empty(), ErrorKind::InvalidArgument, "empty eps list");
  const auto problem = kam::load_problem(problem_path);
  Manifest manifest("kamset", config);
  Json reports = Json::array();
  std::string csv = "eps,gamma,complement,stderr,lipschitz\n";
  std::vector<double> xs, ys;
  for (double eps : eps_list) {
    const auto r = kam::run_pipeline(problem, eps, cfg);
    reports.push_back(kam::to_json(r));
    csv += num(r.eps) + "," + num(r.gamma) + "," + num(r.complement) + "," + num(r.complement_stderr) + "," +
           num(r.lipschitz) + "\n";
    std::cout << "eps " << eps << "  succeeded " << r.succeeded << "/" << r.attempted << "  complement "
              << r.complement << " +- " << r.complement_stderr << "  lipschitz " << r.lipschitz
              << "  worst flow error " << r.worst_flow_error << '\n';
    if (r.complement > 0.0 && r.gamma > 0.0) {
      xs.push_back(r.gamma);
      ys.push_back(r.complement);
    }
  }
  Json doc = {{"reports", reports}};
  if (xs.size() >= 2) {
    doc["slope_vs_gamma"] = slope(xs, ys);
    std::cout << "slope vs eps^q " << doc["slope_vs_gamma"].get<double>() << '\n';
  }
  kam::write_json_file(out, doc);
  write_text(csv_path, csv);
  manifest.output(out);
  manifest.output(csv_path);
  manifest.write(out, Ok);
  return Ok;
}

int cmd_verify(const std::string& problem_path, const std::string& torus_path, double time, int grid, double tol) {
  Json config = {{"problem", problem_path}, {"torus", torus_path}, {"time", time}, {"grid", grid}, {"tol", tol}};
  const auto problem = kam::load_problem(problem_path);
  const Json tj = kam::read_json_file(torus_path);
  const auto torus = kam::torus_from_json(tj);
  kam::require(tj.contains("localization"), ErrorKind::Parse, torus_path + ": missing localization block");
  const Json& lj = tj.at("localization");
  const auto anchor = lj.at("anchor").get<std::vector<double>>();
  const auto loc = kam::localize(problem, anchor, lj.at("width").get<double>(), lj.at("rho").get<double>(),
                                 lj.at("cutoff").get<int>(), lj.at("degree").get<int>());
  kam::VerifyOptions vo;
  vo.theta_points = grid;
  if (time > 0.0) {
    double speed = 0.0;
    for (double w : torus.omega) speed += w * w;
    vo.periods = time * std::sqrt(speed) / (2.0 * std::numbers::pi);
  }
  Manifest manifest("verify", config);
  const auto v = kam::verify(loc, torus, vo);
  std::cout << "invariance_error " << num(v.invariance_error) << '\n';
  const int code = v.invariance_error <= tol ? Ok : VerificationFailure;
  manifest.results() = {{"invariance_error", v.invariance_error}, {"energy_drift", v.energy_drift}};
  manifest.write(torus_path + ".verify", code);
  return code;
}

int cmd_probe(const Numerics& n, const std::vector<double>& scales, const kam::ProbeOptions& po, const std::string& out) {
  Json config = n.echo();
  config["scales"] = scales;
  config["eps_min"] = po.eps_min;
  config["eps_max"] = po.eps_max;
  config["rel_tol"] = po.rel_tol;
  const auto problem = kam::load_problem(n.problem);
  kam::require(static_cast<int>(n.anchor.size()) == problem.dim(), ErrorKind::DimensionMismatch, "anchor dimension");
  Manifest manifest("probe", config);
  std::string csv = "scale,gamma,eps_hat,runs,unconstrained\n";
  std::vector<double> xs, ys;
  for (double c : scales) {
    std::vector<double> y = n.anchor;
    for (double& v : y) v *= c;
    const auto loc = kam::localize(problem, y, n.schedule.xi, n.schedule.rho, n.cutoff, n.degree);
    const double gamma = resolve_gamma(n, loc.omega());
    const auto r = kam::epsilon_threshold_probe(loc, gamma, n.tau, n.schedule, po);
    csv += num(c) + "," + num(gamma) + "," + num(r.eps_hat) + "," + std::to_string(r.runs) + "," +
           (r.unconstrained ? "1" : "0") + "\n";
    if (r.eps_hat > 0.0 && !r.unconstrained) {
      xs.push_back(gamma);
      ys.push_back(r.eps_hat);
    }
  }
  write_text(out, csv);
  manifest.output(out);
  std::cout << csv;
  if (xs.size() >= 2) {
    manifest.results()["exponent"] = slope(xs, ys);
    std::cout << "eps_hat ~ gamma^p with p " << slope(xs, ys) << '\n';
  }
  manifest.write(out, Ok);
  return Ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kamforge: invariant tori of nearly integrable Hamiltonians by Kolmogorov's scheme"};
  app.require_subcommand(1);
  int workers = 1;
  app.add_option("--workers", workers, "worker threads (KAM_FORGE_WORKERS overrides)")->check(CLI::PositiveNumber);

  Numerics n;
  double eps = 1e-3;
  std::string out;

  auto* torus = app.add_subcommand("torus", "Newton scheme at one anchor, writes torus.json");
  add_local(torus, n, true);
  torus->add_option("--eps", eps, "perturbation size")->required();
  torus->add_option("--out", out, "output JSON")->required();
  bool no_verify = false;
  torus->add_flag("--no-verify", no_verify, "skip the flow check");

  auto* lind = app.add_subcommand("lindstedt", "eps-power series of the torus, writes series.json");
  add_local(lind, n, true);
  int orders = 6;
  std::vector<double> residual_eps;
  lind->add_option("--orders", orders, "number of orders K")->check(CLI::PositiveNumber);
  lind->add_option("--residual-eps", residual_eps, "report the invariance residual at these eps");
  lind->add_option("--out", out, "output JSON")->required();

  auto* measure = app.add_subcommand("measure", "Diophantine complement measure, writes CSV");
  std::string problem;
  std::vector<double> lo, hi, gammas;
  double tau = 1.5;
  int dio_cutoff = 0;
  long samples = 100000;
  std::string method = "mc";
  std::uint64_t seed = 1;
  measure->add_option("--problem", problem, "frequency box from the image of V under the frequency map");
  measure->add_option("--lo", lo, "lower corner of the frequency box");
  measure->add_option("--hi", hi, "upper corner of the frequency box");
  measure->add_option("--gamma-list", gammas)->required()->delimiter(',');
  measure->add_option("--tau", tau);
  measure->add_option("--dio-cutoff", dio_cutoff);
  measure->add_option("--samples", samples)->check(CLI::Range(1000L, 100000000L));
  measure->add_option("--method", method, "mc or grid");
  measure->add_option("--seed", seed);
  measure->add_option("--out", out)->required();

  auto* kamset = app.add_subcommand("kamset", "Kolmogorov set pipeline over an eps list, writes JSON and CSV");
  kam::PipelineConfig cfg;
  std::vector<double> eps_list;
  std::string csv_path;
  kamset->add_option("--problem", problem)->required();
  kamset->add_option("--eps-list", eps_list)->required()->delimiter(',');
  kamset->add_option("--q", cfg.q, "gamma = eps^q");
  kamset->add_option("--tau", cfg.tau);
  kamset->add_option("--dio-cutoff", cfg.dio_cutoff);
  kamset->add_option("--ball-radius", cfg.ball_radius);
  kamset->add_option("--anchors", cfg.anchors, "total anchors over the sampled region");
  kamset->add_option("--anchors-per-ball", cfg.anchors_per_axis, "sub-grid points per axis in each ball (overrides --anchors)");
  kamset->add_option("--cutoff", cfg.cutoff);
  kamset->add_option("--degree", cfg.degree);
  kamset->add_option("--xi", cfg.schedule.xi);
  kamset->add_option("--xi-star", cfg.schedule.xi_star);
  kamset->add_option("--rho", cfg.schedule.rho);
  kamset->add_option("--flow-checks", cfg.flow_checks);
  kamset->add_option("--seed", cfg.seed);
  kamset->add_option("--out", out, "report JSON")->required();
  kamset->add_option("--csv", csv_path, "CSV path (default: report path with .csv)");

  auto* verify = app.add_subcommand("verify", "flow check of a stored torus");
  std::string torus_path;
  double time = -1.0, tol = 1e-8;
  int grid = 32;
  verify->add_option("--problem", problem)->required();
  verify->add_option("--torus", torus_path)->required();
  verify->add_option("--time", time, "time horizon (default: 10 periods)");
  verify->add_option("--grid", grid, "theta grid points")->check(CLI::PositiveNumber);
  verify->add_option("--tol", tol);

  auto* probe = app.add_subcommand("probe", "bisection for the largest admissible eps, swept over scaled anchors");
  add_local(probe, n, true);
  std::vector<double> scales{1.0};
  kam::ProbeOptions po;
  po.run.verify = false;
  probe->add_option("--scales", scales, "anchor scale factors")->delimiter(',');
  probe->add_option("--eps-min", po.eps_min);
  probe->add_option("--eps-max", po.eps_max);
  probe->add_option("--rel-tol", po.rel_tol);
  probe->add_option("--out", out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : Config;
  }

  if (const char* env = std::getenv("KAM_FORGE_WORKERS")) {
    try {
      workers = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "KAM_FORGE_WORKERS must be a positive integer\n";
      return Config;
    }
    if (workers < 1) {
      std::cerr << "KAM_FORGE_WORKERS must be a positive integer\n";
      return Config;
    }
  }
  n.workers = cfg.workers = workers;
  n.seed = seed;

  try {
    if (*torus || *lind || *probe) n.schedule.validate();
    if (*torus) {
      kam::RunOptions options;
      options.verify = !no_verify;
      return cmd_torus(n, out, options, eps);
    }
    if (*lind) return cmd_lindstedt(n, out, orders, residual_eps);
    if (*measure) return cmd_measure(problem, lo, hi, gammas, tau, dio_cutoff, samples, method, seed, out);
    if (*kamset) return cmd_kamset(problem, eps_list, cfg, out, csv_path);
    if (*verify) return cmd_verify(problem, torus_path, time, grid, tol);
    if (*probe) return cmd_probe(n, scales, po, out);
  } catch (const kam::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Divergence;
  } catch (const kam::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  }
  return Config;
}
