// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance <kamforge-cli> <problems-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "kam/diophantine.hpp"
#include "kam/error.hpp"
#include "kam/kolmogorov_set.hpp"
#include "kam/kolmogorov_step.hpp"
#include "kam/lindstedt.hpp"
#include "kam/newton_scheme.hpp"
#include "support.hpp"

using namespace kam;
using kamtest::kPhi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int k, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = o.pass && sec < limit_seconds;
  if (!pass) ++failures;
  std::printf("Criterion %d: %s  %s  [%.1f s, limit %.0f s]\n", k, pass ? "PASS" : "FAIL", o.detail.c_str(), sec,
              limit_seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

LocalizedProblem standard_loc(const std::vector<double>& anchor, double radius = 0.6) {
  return localize(kamtest::standard_d2(anchor, radius), anchor, 0.5, 0.5, 16, 4);
}

const std::vector<double> kGolden{1.0, kPhi};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <kamforge-cli> <problems-dir>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const std::filesystem::path problems = argv[2];

  criterion(1, 1.0, [] {
    std::mt19937_64 rng(2024);
    const std::vector<double> w{1.0, kPhi};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto f = kamtest::random_trig(rng, 2, 8, true);
      const auto back = directional_derivative(solve_cohomological(f, w, 1.0).solution, w);
      for (const auto& [n, c] : f.coeffs()) worst = std::max(worst, std::abs(back.coeff(n) - c));
    }
    return Outcome{worst <= 1e-12, fmt("max coefficient error %.2e over 100 trials", worst)};
  });

  criterion(2, 10.0, [] {
    const auto loc = standard_loc(kGolden);
    const double eps = 1e-3;
    const Schedule s;
    const auto P = loc.perturbation(eps).reshaped(4, 16, s.xi);
    const auto step = build_step(loc.knf, P, eps, 0.1, 1.0, s.delta(0), {s.rho});
    const auto out = apply_step(loc.knf, P, step, {s.rho, true});
    const double stray = eps * out.report.first_order_stray;
    return Outcome{stray <= 1e-11, fmt("first-order stray %.2e", stray)};
  });

  // Criteria 3 and 4 share one Newton run.
  TorusResult torus;
  double torus_seconds = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      torus = run(standard_loc(kGolden), 1e-3, 0.1, 1.0, Schedule{});
    } catch (const std::exception& e) {
      torus.status = e.what();
    }
    torus_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  criterion(3, 120.0 - torus_seconds, [&] {
    std::vector<double> in, out;
    for (const auto& r : torus.history) {
      in.push_back(r.norm_P_in);
      out.push_back(r.norm_P_out);
    }
    if (in.size() < 3) return Outcome{false, "fewer than 3 iterations (" + torus.status + ")"};
    const double p = kamtest::loglog_slope(in, out);
    return Outcome{std::abs(p - 2.0) <= 0.2,
                   fmt("slope %.3f over %.0f iterations, norms %.2e -> %.2e", p, double(in.size()), in.front(),
                       out.back()) +
                       fmt(" (shared Newton run %.1f s)", torus_seconds)};
  });

  criterion(4, 120.0 - torus_seconds, [&] {
    return Outcome{torus.success && torus.invariance_error <= 1e-8,
                   fmt("invariance error %.2e over 10 periods, 32 theta points (shared Newton run %.1f s)",
                       torus.invariance_error, torus_seconds)};
  });

  criterion(5, 1800.0, [] {
    std::vector<double> gs, es;
    std::string detail;
    for (double target : {0.08, 0.04, 0.02}) {
      const double c = target / kPhi;
      const std::vector<double> w{c, c * kPhi};
      const double gamma = max_gamma(w, 1.0, 1000) * (1.0 - 1e-9);
      const auto loc = localize(kamtest::standard_d2(w, 1.0), w, 0.5, 0.5, 16, 4);
      ProbeOptions po;
      po.eps_max = 1.0;
      po.eps_min = 1e-14;
      po.run.verify = false;
      const auto r = epsilon_threshold_probe(loc, gamma, 1.0, Schedule{}, po);
      gs.push_back(gamma);
      es.push_back(r.eps_hat);
      detail += fmt("gamma %.3f: eps_hat %.2e; ", gamma, r.eps_hat);
    }
    const double p = kamtest::loglog_slope(gs, es);
    return Outcome{std::abs(p - 4.0) <= 1.0, detail + fmt("p = %.2f", p)};
  });

  criterion(6, 60.0, [] {
    const FrequencyDomain dom{{1.0, 1.0}, {2.0, 2.0}};
    std::vector<double> gs, ms;
    bool below = true;
    std::string detail;
    for (double g : {0.01, 0.02, 0.04}) {
      const auto e = measure_complement(dom, {g, 1.5, 1000}, SamplingMethod::MonteCarlo, 100000, 7);
      gs.push_back(g);
      ms.push_back(e.estimate);
      below = below && e.estimate <= e.analytic_bound;
      detail += fmt("gamma %.2f: %.4f <= %.3f; ", g, e.estimate, e.analytic_bound);
    }
    const double slope = kamtest::loglog_slope(gs, ms);
    return Outcome{below && std::abs(slope - 1.0) <= 0.15, detail + fmt("slope %.3f", slope)};
  });

  // Criteria 7 and 8 share the pipeline reports.
  const auto pipeline_problem = kamtest::standard_d2({1.5, 1.5}, 0.5);
  PipelineConfig cfg;
  cfg.q = 0.2;
  cfg.schedule.rho = 0.1;
  cfg.anchors = 200;
  cfg.workers = 8;
  std::vector<KolmogorovSetReport> reports;

  criterion(7, 3600.0, [&] {
    std::vector<double> x, y;
    std::string detail;
    bool decreasing = true, consistent = true;
    for (double eps : {1e-4, 1e-5, 1e-6}) {
      reports.push_back(run_pipeline(pipeline_problem, eps, cfg));
      const auto& r = reports.back();
      if (!y.empty()) decreasing = decreasing && r.complement < y.back();
      consistent = consistent && r.flow_consistent;
      x.push_back(std::pow(eps, 0.2));
      y.push_back(r.complement);
      detail += fmt("eps %.0e: %.4f (%.0f anchors); ", eps, r.complement, double(r.attempted));
    }
    const double slope = kamtest::loglog_slope(x, y);
    return Outcome{decreasing && consistent && slope >= 0.7 && slope <= 1.3,
                   detail + fmt("slope %.3f", slope) + (consistent ? "" : ", flow check failed")};
  });

  criterion(8, 600.0, [&] {
    if (reports.size() < 2) return Outcome{false, "pipeline at eps = 1e-5 unavailable"};
    const double lip = reports[1].lipschitz;
    bool lemmas = true;
    std::string detail = fmt("Lipschitz %.6f at eps 1e-5 (report from criterion 7); ", lip);
    for (const auto& c : lipschitz_lemma_checks()) {
      lemmas = lemmas && c.pass;
      detail += c.name + fmt(" %.4g vs %.4g; ", c.measured, c.bound);
    }
    return Outcome{lip <= 2.0 && lemmas, detail};
  });

  criterion(9, 300.0, [] {
    const auto loc = standard_loc(kGolden);
    const auto series = expand(loc, 0.3, 1.0, 6);
    Schedule sched;
    sched.target_norm = 1e-30;
    const auto family = newton_family(loc, 0.01, 6, 0.3, 1.0, sched, RunOptions{false});
    const auto fit = fit_newton_orders(series, family, 4);
    bool pass = fit.relative_deviation.size() >= 2 && fit.relative_deviation[0] <= 1e-6 &&
                fit.relative_deviation[1] <= 1e-6;
    std::string detail = fmt("orders 1-2 relative deviation %.1e, %.1e; residual slopes", fit.relative_deviation[0],
                             fit.relative_deviation[1]);
    const std::vector<double> eps{0.04, 0.02, 0.01, 0.005};
    for (int K = 1; K <= 4; ++K) {
      std::vector<double> r;
      for (double e : eps) r.push_back(residual(series, loc, e, K));
      const double slope = kamtest::loglog_slope(eps, r);
      pass = pass && std::abs(slope - (K + 1)) <= 0.5;
      detail += fmt(" K=%.0f: %.2f", K, slope);
    }
    return Outcome{pass, detail};
  });

  criterion(10, 600.0, [&] {
    const auto dir = std::filesystem::temp_directory_path() / ("kamforge_accept_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    auto run_cli = [&](const std::string& tag, int workers) {
      const std::string cmd = "\"" + cli + "\" --workers " + std::to_string(workers) + " kamset --problem \"" +
                              (problems / "kamset_d2.json").string() +
                              "\" --eps-list 1e-4,1e-5 --anchors 24 --rho 0.1 --cutoff 8 --degree 2 --seed 17"
                              " --flow-checks 2 --out \"" +
                              (dir / (tag + ".json")).string() + "\" > /dev/null 2>&1";
      return std::system(cmd.c_str());
    };
    const int a = run_cli("first", 1);
    const int b = run_cli("second", 1);
    const int c = run_cli("third", 3);
    const auto first = slurp(dir / "first.csv");
    const bool same = a == 0 && b == 0 && c == 0 && !first.empty() && first == slurp(dir / "second.csv") &&
                      first == slurp(dir / "third.csv");
    std::filesystem::remove_all(dir);
    return Outcome{same, fmt("%.0f CSV bytes, identical across two runs and 1 vs 3 workers: ", double(first.size())) +
                             (same ? "yes" : "no")};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
