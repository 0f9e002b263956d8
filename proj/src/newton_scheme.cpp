#include "kam/newton_scheme.hpp"

#include <cmath>
#include <limits>

#include "kam/angle_grid.hpp"
#include "kam/error.hpp"

namespace kam {

namespace {

// theta with theta + eps*alpha(theta) = x, by Newton's method on the projected alpha.
Point invert_shift(const HalfSpectrum& spec, const std::vector<std::vector<Complex>>& alpha,
                   const std::vector<std::vector<std::vector<Complex>>>& dalpha, double eps, const Point& x, int d) {
  Point t = x;
  std::vector<Complex> w;
  for (int it = 0; it < 60; ++it) {
    spec.phases(t, w);
    SmallMatrix J(d, d);
    Eigen::VectorXd F(d);
    for (int i = 0; i < d; ++i) {
      F(i) = t[i] + eps * HalfSpectrum::apply(alpha[i], w) - x[i];
      for (int j = 0; j < d; ++j) J(i, j) = (i == j ? 1.0 : 0.0) + eps * HalfSpectrum::apply(dalpha[i][j], w);
    }
    const Eigen::VectorXd step = J.partialPivLu().solve(F);
    double size = 0.0;
    for (int i = 0; i < d; ++i) {
      t[i] -= step(i);
      size = std::max(size, std::abs(step(i)));
    }
    if (size <= 1e-15) break;
  }
  return t;
}

}  // namespace

double Schedule::delta(int j) const { return delta0() / std::ldexp(1.0, j); }

void Schedule::validate() const {
  require(xi > 0.0 && xi_star > 0.0 && xi_star < xi, ErrorKind::InvalidArgument, "schedule needs 0 < xi_star < xi");
  require(rho > 0.0, ErrorKind::InvalidArgument, "schedule needs a positive action radius");
  require(max_iterations >= 1, ErrorKind::InvalidArgument, "schedule needs at least one iteration");
  require(strip_fraction > 0.0, ErrorKind::InvalidArgument, "strip fraction must be positive");
}

ComposedMap::ComposedMap(std::vector<SymplecticStep> steps) : steps_(std::move(steps)) {
  for (std::size_t j = 0; j + 1 < steps_.size(); ++j)
    if (steps_[j].width_out < steps_[j + 1].width_in - 1e-12)
      fail(ErrorKind::WidthChainViolation, "step " + std::to_string(j + 1) + " starts wider than step " +
                                               std::to_string(j) + " ends");
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) compiled_.push_back(std::make_shared<const CompiledStep>(*it));
}

ComposedMap compose_maps(std::vector<SymplecticStep> steps) { return ComposedMap(std::move(steps)); }

void ComposedMap::apply(std::span<const double> y, std::span<const double> x, double* Y, double* X) const {
  const int d = static_cast<int>(y.size());
  Point yc{}, xc{}, yn{}, xn{};
  for (int j = 0; j < d; ++j) {
    yc[j] = y[j];
    xc[j] = x[j];
  }
  for (const auto& cs : compiled_) {
    cs->apply(std::span<const double>(yc.data(), d), std::span<const double>(xc.data(), d), yn.data(), xn.data());
    yc = yn;
    xc = xn;
  }
  for (int j = 0; j < d; ++j) {
    Y[j] = yc[j];
    X[j] = xc[j];
  }
}

Eigen::MatrixXd ComposedMap::jacobian(std::span<const double> y, std::span<const double> x) const {
  const int d = static_cast<int>(y.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(2 * d, 2 * d);
  Point yc{}, xc{}, yn{}, xn{};
  for (int j = 0; j < d; ++j) {
    yc[j] = y[j];
    xc[j] = x[j];
  }
  for (const auto& cs : compiled_) {
    const std::span<const double> ys(yc.data(), d), xs(xc.data(), d);
    J = cs->jacobian(ys, xs) * J;
    cs->apply(ys, xs, yn.data(), xn.data());
    yc = yn;
    xc = xn;
  }
  return J;
}

void ComposedMap::restriction(double eps, int dim, int cutoff, TrigVector& u, TrigVector& alpha, double* tail) const {
  u = zero_vector(dim, cutoff);
  alpha = zero_vector(dim, cutoff);
  if (steps_.empty() || eps == 0.0) return;
  AngleGrid grid(dim, product_grid_points(cutoff));
  std::vector<std::vector<double>> us(dim, std::vector<double>(grid.size()));
  std::vector<std::vector<double>> as(dim, std::vector<double>(grid.size()));
  std::vector<Complex> w;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point theta = grid.point(k);
    Point yc{}, shift{}, xc = theta;
    for (const auto& ptr : compiled_) {
      const CompiledStep& cs = *ptr;
      if (cs.identity) continue;
      // The angle displacement is accumulated separately to keep its relative accuracy.
      const Point delta = cs.solve_shift(std::span<const double>(xc.data(), dim), w);
      const Point y_new = yc;
      for (int i = 0; i < dim; ++i) {
        double eta = cs.b[i] + HalfSpectrum::apply(cs.ds[i], w);
        for (int j = 0; j < dim; ++j) eta += HalfSpectrum::apply(cs.dbeta[i][j], w) * y_new[j];
        yc[i] = y_new[i] + cs.scale * eta;
      }
      for (int i = 0; i < dim; ++i) {
        shift[i] += delta[i];
        xc[i] = theta[i] + shift[i];
      }
    }
    for (int i = 0; i < dim; ++i) {
      us[i][k] = yc[i] / eps;
      as[i][k] = shift[i] / eps;
    }
  }
  for (int i = 0; i < dim; ++i) {
    u[i] = grid.project_real(us[i], cutoff, tail);
    alpha[i] = grid.project_real(as[i], cutoff, tail);
  }
}

void TorusResult::embed(std::span<const double> theta, double* y, double* x) const {
  const int d = dim();
  Phases ph(theta, d, u_star.empty() ? 0 : u_star[0].cutoff());
  for (int i = 0; i < d; ++i) {
    y[i] = eps * ph.evaluate(u_star[i]);
    x[i] = theta[i] + eps * ph.evaluate(alpha_star[i]);
  }
}

Verification verify(const LocalizedProblem& localized, const TorusResult& torus, const VerifyOptions& options,
                    double flow_tolerance) {
  FlowSpec spec;
  spec.H = localized.hamiltonian(torus.eps);
  spec.abs_tol = spec.rel_tol = flow_tolerance;
  Embedding zeta = [&torus](std::span<const double> theta, double* y, double* x) { torus.embed(theta, y, x); };
  return verify_torus(spec, zeta, torus.omega, options);
}

TorusResult run(const LocalizedProblem& localized, double eps, double gamma, double tau, const Schedule& schedule,
                const RunOptions& options) {
  schedule.validate();
  const int d = localized.dim();
  const int N = localized.knf.Q.cutoff();
  const int D = localized.knf.Q.degree();
  const double rho = schedule.rho;

  TorusResult r;
  r.omega = localized.omega();
  r.eps = eps;
  r.anchor = localized.anchor;
  r.invariance_tolerance = options.invariance_tolerance;

  KolmogorovNormalForm knf = localized.knf;
  knf.width = schedule.xi;
  knf.Q.set_width(schedule.xi);
  FourierTaylor P = localized.perturbation(eps).reshaped(D, N, schedule.xi);
  const double normH = norm(localized.hamiltonian(eps), schedule.xi, rho).value;
  r.target_norm = schedule.target_norm > 0.0 ? schedule.target_norm : 1e-12 * normH;

  std::vector<SymplecticStep> steps;
  double scale = eps;
  int growth = 0;
  r.final_norm = std::abs(scale) * norm(P, knf.width, rho).value;
  StepOptions step_options;
  step_options.radius = rho;
  step_options.strip_fraction = schedule.strip_fraction;
  for (int j = 0; j < schedule.max_iterations; ++j) {
    const double norm_in = std::abs(scale) * norm(P, knf.width, rho).value;
    if (norm_in <= r.target_norm) break;
    StepOutcome outcome;
    SymplecticStep step;
    try {
      step = build_step(knf, P, scale, gamma, tau, schedule.delta(j), step_options);
      step.eps_power = 1L << std::min(j, 62);
      outcome = apply_step(knf, P, step, {rho, j == 0});
    } catch (const Error& e) {
      throw Error(e.kind(), "iteration " + std::to_string(j) + ": " + e.detail());
    }
    outcome.report.iteration = j;
    r.history.push_back(outcome.report);
    if (outcome.report.norm_P_out > outcome.report.norm_P_in) {
      if (++growth >= 2)
        throw DivergenceError("perturbation grew twice in a row at iteration " + std::to_string(j), r.history);
    } else {
      growth = 0;
    }
    steps.push_back(std::move(step));
    knf = std::move(outcome.knf);
    P = std::move(outcome.P);
    scale *= scale;
    r.final_norm = outcome.report.norm_P_out;
    if (r.final_norm <= r.target_norm) break;
  }
  r.converged = r.final_norm <= r.target_norm;
  r.map = ComposedMap(std::move(steps));

  // Torus data.
  r.map.restriction(eps, d, N, r.u_star, r.alpha_star);
  const HalfSpectrum spec(d, N);
  std::vector<std::vector<Complex>> pu, pa;
  std::vector<std::vector<std::vector<Complex>>> dpa(d);
  for (int i = 0; i < d; ++i) {
    pu.push_back(spec.pack(r.u_star[i]));
    pa.push_back(spec.pack(r.alpha_star[i]));
    for (int j = 0; j < d; ++j) dpa[i].push_back(spec.pack_derivative(r.alpha_star[i], j));
  }
  AngleGrid grid(d, product_grid_points(N));
  std::vector<std::vector<double>> gs(d, std::vector<double>(grid.size()));
  std::vector<std::vector<double>> inv(d, std::vector<double>(grid.size()));
  std::vector<Complex> w;
  r.min_jacobian_det = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.point(k);
    spec.phases(x, w);
    SmallMatrix J(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) J(i, j) = (i == j ? 1.0 : 0.0) + eps * HalfSpectrum::apply(dpa[i][j], w);
    r.min_jacobian_det = std::min(r.min_jacobian_det, J.determinant());
    const Point theta = invert_shift(spec, pa, dpa, eps, x, d);
    spec.phases(theta, w);
    for (int i = 0; i < d; ++i) {
      gs[i][k] = eps * HalfSpectrum::apply(pu[i], w);
      inv[i][k] = eps == 0.0 ? 0.0 : (theta[i] - x[i]) / eps;
    }
  }
  r.graph.clear();
  TrigVector a_star;
  for (int i = 0; i < d; ++i) {
    r.graph.push_back(grid.project_real(gs[i], N));
    a_star.push_back(grid.project_real(inv[i], N));
  }
  // Graph consistency: graph(x) against eps*u*(x + eps*a*(x)), both from projections.
  r.graph_consistency = 0.0;
  for (std::size_t k = 0; k < grid.size(); k += 7) {
    const Point x = grid.point(k);
    Phases px(x, d, N);
    Point theta = x;
    for (int i = 0; i < d; ++i) theta[i] += eps * px.evaluate(a_star[i]);
    Phases pt(theta, d, N);
    for (int i = 0; i < d; ++i)
      r.graph_consistency = std::max(r.graph_consistency, std::abs(px.evaluate(r.graph[i]) - eps * pt.evaluate(r.u_star[i])));
  }

  if (options.verify) {
    r.invariance_error = verify(localized, r, options.verification, options.flow_tolerance).invariance_error;
    r.verified = r.invariance_error <= options.invariance_tolerance;
  }
  r.success = r.converged && r.min_jacobian_det > 0.0 && (!options.verify || r.verified);
  r.status = r.success ? "ok" : (!r.converged ? "not converged" : (r.min_jacobian_det <= 0.0 ? "not a graph" : "verification failed"));
  return r;
}

ProbeResult epsilon_threshold_probe(const LocalizedProblem& localized, double gamma, double tau,
                                    const Schedule& schedule, const ProbeOptions& options) {
  ProbeResult out;
  auto succeeds = [&](double eps) {
    ++out.runs;
    try {
      return run(localized, eps, gamma, tau, schedule, options.run).success;
    } catch (const Error&) {
      return false;
    }
  };
  if (succeeds(options.eps_max)) {
    out.eps_hat = options.eps_max;
    out.unconstrained = true;
    return out;
  }
  double lo = options.eps_min, hi = options.eps_max;
  if (!succeeds(lo)) return out;
  while (hi / lo > 1.0 + options.rel_tol) {
    const double mid = std::sqrt(lo * hi);
    (succeeds(mid) ? lo : hi) = mid;
  }
  out.eps_hat = lo;
  return out;
}

}  // namespace kam
