#include "kam/kolmogorov_set.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include "kam/error.hpp"
#include "kam/flow_oracle.hpp"

namespace kam {

const char* to_string(AnchorStatus status) {
  switch (status) {
    case AnchorStatus::Excluded: return "excluded";
    case AnchorStatus::Failed: return "failed";
    case AnchorStatus::Succeeded: return "succeeded";
    case AnchorStatus::Unanalyzed: return "unanalyzed";
  }
  return "unknown";
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f) {
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex guard;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!first) first = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

struct AnchorSample {
  std::vector<double> y;
  bool degenerate_cell = false;
};

// Cells of side 2r/sqrt(d) over the bounding cube of the inner ball, each with a
// jittered k^d sub-grid; samples outside the inner ball are dropped.
std::vector<AnchorSample> anchor_samples(const NearlyIntegrable& problem, const ActionBall& inner,
                                         const PipelineConfig& cfg) {
  const int d = problem.dim();
  const double side = 2.0 * cfg.ball_radius / std::sqrt(double(d));
  const int cells = std::max(1, int(std::ceil(2.0 * inner.radius / side - 1e-12)));
  const double density = cfg.anchors / inner.measure();
  const int k = cfg.anchors_per_axis > 0 ? cfg.anchors_per_axis
                                         : std::max(1, int(std::lround(std::pow(density * std::pow(side, d), 1.0 / d))));
  std::mt19937_64 rng(cfg.seed);
  std::vector<AnchorSample> out;
  long total_cells = 1;
  for (int j = 0; j < d; ++j) total_cells *= cells;
  const double origin = -0.5 * cells * side;
  std::vector<double> center(d), y(d);
  for (long c = 0; c < total_cells; ++c) {
    long r = c;
    for (int j = 0; j < d; ++j) {
      center[j] = inner.center[j] + origin + side * ((r % cells) + 0.5);
      r /= cells;
    }
    bool degenerate = false;
    try {
      check_nondegenerate(problem.H0, center);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateHessian) throw;
      degenerate = true;
    }
    long sub = 1;
    for (int j = 0; j < d; ++j) sub *= k;
    for (long s = 0; s < sub; ++s) {
      long q = s;
      for (int j = 0; j < d; ++j) {
        y[j] = center[j] - 0.5 * side + side * ((q % k) + unit_draw(rng())) / k;
        q /= k;
      }
      if (inner.contains(y)) out.push_back({y, degenerate});
    }
  }
  return out;
}

}  // namespace

KolmogorovSetReport run_pipeline(const NearlyIntegrable& problem, double eps, const PipelineConfig& cfg) {
  const int d = problem.dim();
  require(eps >= 0.0 && eps < problem.eps0, ErrorKind::InvalidArgument, "pipeline needs 0 <= eps < eps0");
  require(cfg.q > 0.0 && cfg.ball_radius > 0.0 && cfg.anchors >= 1, ErrorKind::InvalidArgument,
          "pipeline needs q > 0, a positive ball radius and at least one anchor");
  cfg.schedule.validate();
  const ActionBall inner{problem.V.center, problem.V.radius - cfg.schedule.rho};
  require(inner.radius > 0.0, ErrorKind::DomainOverflow, "action ball is thinner than the localization radius");

  KolmogorovSetReport rep;
  rep.eps = eps;
  rep.q = cfg.q;
  rep.gamma = eps > 0.0 ? std::pow(eps, cfg.q) : 0.0;
  rep.sampled_measure = inner.measure();
  const DiophantineParams dio{rep.gamma, cfg.tau, cfg.dio_cutoff > 0 ? cfg.dio_cutoff : default_diophantine_cutoff(d)};

  const auto samples = anchor_samples(problem, inner, cfg);
  rep.attempted = static_cast<long>(samples.size());
  require(rep.attempted > 0, ErrorKind::InsufficientSamples, "no anchor inside the inner ball");
  rep.anchors.resize(samples.size());
  std::vector<std::optional<TorusResult>> tori(samples.size());

  RunOptions run_options;
  run_options.verify = false;
  parallel_for(samples.size(), cfg.workers, [&](std::size_t i) {
    AnchorSummary& a = rep.anchors[i];
    a.anchor = samples[i].y;
    if (samples[i].degenerate_cell) {
      a.status = AnchorStatus::Unanalyzed;
      a.error = "DegenerateHessian";
      return;
    }
    a.omega = frequency_map(problem.H0, a.anchor);
    const auto c = check(a.omega, dio);
    a.dio_margin = c.margin;
    if (!c.pass) {
      a.status = AnchorStatus::Excluded;
      return;
    }
    try {
      const auto loc = localize(problem, a.anchor, cfg.schedule.xi, cfg.schedule.rho, cfg.cutoff, cfg.degree);
      TorusResult t = run(loc, eps, rep.gamma, cfg.tau, cfg.schedule, run_options);
      a.iterations = static_cast<int>(t.history.size());
      a.final_norm = t.final_norm;
      a.min_jacobian_det = t.min_jacobian_det;
      if (t.success) {
        a.status = AnchorStatus::Succeeded;
        tori[i] = std::move(t);
      } else {
        a.status = AnchorStatus::Failed;
        a.error = t.status;
      }
    } catch (const Error& e) {
      a.status = AnchorStatus::Failed;
      a.error = e.what();
    }
  });

  KolmogorovMapSamples map_samples;
  map_samples.eps = eps;
  std::vector<std::size_t> good;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    switch (rep.anchors[i].status) {
      case AnchorStatus::Excluded: ++rep.excluded; break;
      case AnchorStatus::Failed: ++rep.failed; break;
      case AnchorStatus::Unanalyzed: ++rep.unanalyzed; break;
      case AnchorStatus::Succeeded:
        ++rep.succeeded;
        good.push_back(i);
        map_samples.entries.push_back({rep.anchors[i].anchor, rep.anchors[i].omega, tori[i]->u_star, tori[i]->alpha_star});
        break;
    }
  }
  const double n = double(rep.attempted);
  rep.excluded_measure = rep.excluded / n * rep.sampled_measure;
  rep.failed_measure = rep.failed / n * rep.sampled_measure;
  rep.unanalyzed_measure = rep.unanalyzed / n * rep.sampled_measure;
  if (map_samples.entries.size() >= 2) rep.lipschitz = lipschitz_estimate(map_samples, cfg.verification.theta_points);
  const double p = (rep.excluded + rep.failed + rep.unanalyzed) / n;
  const double inflation = std::pow(rep.lipschitz, d);
  rep.complement = p * rep.sampled_measure * inflation;
  rep.complement_stderr = std::sqrt(p * (1.0 - p) / n) * rep.sampled_measure * inflation;

  // Flow checks on a seeded random subset of the successful anchors.
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = good.size(); i > 1; --i) std::swap(good[i - 1], good[rng() % i]);
  good.resize(std::min<std::size_t>(good.size(), std::max(0, cfg.flow_checks)));
  parallel_for(good.size(), cfg.workers, [&](std::size_t k) {
    const std::size_t i = good[k];
    const auto loc = localize(problem, rep.anchors[i].anchor, cfg.schedule.xi, cfg.schedule.rho, cfg.cutoff, cfg.degree);
    rep.anchors[i].invariance_error = verify(loc, *tori[i], cfg.verification).invariance_error;
  });
  for (std::size_t i : good) {
    rep.worst_flow_error = std::max(rep.worst_flow_error, rep.anchors[i].invariance_error);
    rep.flow_consistent = rep.flow_consistent && rep.anchors[i].invariance_error <= tori[i]->invariance_tolerance;
  }
  return rep;
}

double lipschitz_estimate(const KolmogorovMapSamples& samples, int theta_points) {
  const auto& E = samples.entries;
  require(E.size() >= 2, ErrorKind::InsufficientSamples, "Lipschitz estimate needs at least two samples");
  const int d = static_cast<int>(E[0].anchor.size());
  const int N = E[0].u_star.empty() ? 0 : E[0].u_star[0].cutoff();
  for (const auto& e : E)
    if (static_cast<int>(e.anchor.size()) != d || e.u_star.size() != std::size_t(d) || e.alpha_star.size() != std::size_t(d) ||
        e.u_star[0].cutoff() != N)
      fail(ErrorKind::GridMismatch, "Kolmogorov map samples differ in dimension or cutoff");
  const auto thetas = theta_grid(d, theta_points);
  // psi - (anchor, theta) on the theta grid, per sample.
  std::vector<std::vector<double>> offset(E.size());
  for (std::size_t s = 0; s < E.size(); ++s) {
    for (const Point& t : thetas) {
      Phases ph(t, d, N);
      for (int j = 0; j < d; ++j) offset[s].push_back(samples.eps * ph.evaluate(E[s].u_star[j]));
      for (int j = 0; j < d; ++j) offset[s].push_back(samples.eps * ph.evaluate(E[s].alpha_star[j]));
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < E.size(); ++a)
    for (std::size_t b = a + 1; b < E.size(); ++b) {
      double dy2 = 0.0;
      for (int j = 0; j < d; ++j) dy2 += (E[a].anchor[j] - E[b].anchor[j]) * (E[a].anchor[j] - E[b].anchor[j]);
      if (dy2 == 0.0) continue;
      for (std::size_t t = 0; t < thetas.size(); ++t) {
        double s2 = 0.0;
        for (int j = 0; j < d; ++j) {
          const double dy = E[a].anchor[j] - E[b].anchor[j] + offset[a][2 * d * t + j] - offset[b][2 * d * t + j];
          const double dx = offset[a][2 * d * t + d + j] - offset[b][2 * d * t + d + j];
          s2 += dy * dy + dx * dx;
        }
        worst = std::max(worst, std::sqrt(s2 / dy2));
      }
    }
  return worst;
}

namespace {

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// D_w^{-1} f for the synthetic family, f = cos(x1+x2) + cos(x1)/2 + cos(x2)/4.
TrigPolynomial inverse_family(std::span<const double> omega) {
  TrigPolynomial f = TrigPolynomial::cosine(2, 1, {1, 1, 0}) + TrigPolynomial::cosine(2, 1, {1, 0, 0}, 0.5) +
                     TrigPolynomial::cosine(2, 1, {0, 1, 0}, 0.25);
  return solve_cohomological(f, omega, 1.0).solution;
}

Eigen::Matrix2d synthetic_matrix(double w1, double w2) {
  Eigen::Matrix2d A;
  A << w1 + 1.0, 0.5 * w2, 0.2 * w1, w2 + 2.0;
  return A;
}

double shift_field(double t, double w) { return std::sin(t + w) + 0.3 * std::cos(2.0 * t) * w; }
double shift_field_t(double t, double w) { return std::cos(t + w) - 0.6 * std::sin(2.0 * t) * w; }
double shift_field_w(double t, double w) { return std::cos(t + w) + 0.3 * std::cos(2.0 * t); }

// alpha with theta = x + eps alpha(x) and theta + eps a(theta) = x.
double inverse_shift(double x, double w, double eps) {
  double t = x;
  for (int it = 0; it < 100; ++it) {
    const double step = (t + eps * shift_field(t, w) - x) / (1.0 + eps * shift_field_t(t, w));
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return (t - x) / eps;
}

}  // namespace

std::vector<LemmaCheck> lipschitz_lemma_checks() {
  std::vector<LemmaCheck> out;

  // (i) Near the resonance n = (1, 1), w.n = gamma and the w-derivative of D_w^{-1} f grows like gamma^-2.
  {
    const std::vector<double> gammas{0.01, 0.02, 0.04, 0.08};
    std::vector<double> lip;
    for (double g : gammas) {
      require(g <= 0.5, ErrorKind::InvalidArgument, "lemma checks assume gamma <= 1/2");
      const double h = 1e-4 * g;
      const std::vector<double> lo{1.0, -1.0 + g - h}, hi{1.0, -1.0 + g + h};
      lip.push_back((inverse_family(hi) - inverse_family(lo)).weighted_l1(0.0) / (2.0 * h));
    }
    const double slope = log_slope(gammas, lip);
    out.push_back({"inverse D_w Lipschitz slope in gamma", slope, -2.0, std::abs(slope + 2.0) <= 0.4});
  }

  // Single-mode family F(w) = sin(n.x)/(w.n): d/dw_j F = -n_j sin(n.x)/(w.n)^2.
  {
    const Index n{2, -1, 0};
    const std::vector<double> w{1.0, 0.618};
    const double wn = w[0] * n[0] + w[1] * n[1];
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-5;
      std::vector<double> p = w, m = w;
      p[j] += h;
      m[j] -= h;
      const TrigPolynomial f = TrigPolynomial::cosine(2, 2, n);
      const TrigPolynomial fd = (solve_cohomological(f, p, 1.0).solution - solve_cohomological(f, m, 1.0).solution);
      const TrigPolynomial exact = TrigPolynomial::sine(2, 2, n, -n[j] / (wn * wn));
      TrigPolynomial diff = fd;
      diff *= 1.0 / (2.0 * h);
      diff -= exact;
      worst = std::max(worst, diff.max_abs() * 2.0);
    }
    out.push_back({"single-mode derivative vs closed form", worst, 1e-6, worst <= 1e-6});
  }

  // (ii) Lip(A^{-1}) <= lambda m^2 for A(w) = A0 + w1 A1 + w2 A2 on [1, 2]^2.
  {
    const int m = 21;
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) pts.push_back({1.0 + double(i) / (m - 1), 1.0 + double(j) / (m - 1)});
    double minv = 0.0;
    std::vector<Eigen::Matrix2d> inv;
    for (const auto& p : pts) {
      inv.push_back(synthetic_matrix(p[0], p[1]).inverse());
      minv = std::max(minv, inv.back().operatorNorm());
    }
    // A is affine in w, so lambda = max over unit directions of |v1 A1 + v2 A2|.
    const Eigen::Matrix2d A0 = synthetic_matrix(0, 0);
    const Eigen::Matrix2d A1 = synthetic_matrix(1, 0) - A0, A2 = synthetic_matrix(0, 1) - A0;
    double lambda = 0.0;
    for (int k = 0; k < 3600; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 3600;
      lambda = std::max(lambda, (std::cos(t) * A1 + std::sin(t) * A2).operatorNorm());
    }
    double measured = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) {
        const double dw = std::hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]);
        measured = std::max(measured, (inv[a] - inv[b]).operatorNorm() / dw);
      }
    const double bound = lambda * minv * minv;
    out.push_back({"matrix inverse Lipschitz vs lambda m^2", measured, bound, measured <= 1.1 * bound});
  }

  // (iii) theta + eps a(theta; w) = x inverted as theta = x + eps alpha(x; w):
  // Lip_w(alpha) <= lambda / (1 - |eps| |a_theta|).
  {
    const double eps = 0.4;
    double lambda = 0.0, ax = 0.0;
    for (int i = 0; i < 400; ++i)
      for (int j = 0; j <= 100; ++j) {
        const double t = 2.0 * std::numbers::pi * i / 400, w = j / 100.0;
        lambda = std::max(lambda, std::abs(shift_field_w(t, w)));
        ax = std::max(ax, std::abs(shift_field_t(t, w)));
      }
    require(eps * ax < 1.0, ErrorKind::InvalidArgument, "inverse-shift check needs |eps| |a_x| < 1");
    double measured = 0.0;
    const double h = 1e-3;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 50; ++j) {
        const double x = 2.0 * std::numbers::pi * i / 200, w = j / 50.0;
        measured = std::max(measured, std::abs(inverse_shift(x, w + h, eps) - inverse_shift(x, w, eps)) / h);
      }
    const double bound = lambda / (1.0 - eps * ax);
    out.push_back({"inverse shift Lipschitz vs lambda/(1 - eps |a_x|)", measured, bound, measured <= 1.1 * bound});
  }
  return out;
}

}  // namespace kam
