#include "kam/kolmogorov_step.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "kam/angle_grid.hpp"
#include "kam/error.hpp"
#include "kam/half_spectrum.hpp"

namespace kam {

namespace {

// Dense polynomials of degree <= D in d variables, used pointwise on the grid.
class PolyTable {
 public:
  PolyTable(int dim, int degree) : dim_(dim), monos_(monomials(dim, degree)) {
    for (std::size_t k = 0; k < monos_.size(); ++k) pos_[monos_[k]] = static_cast<int>(k);
    times_.resize(monos_.size());
    for (std::size_t k = 0; k < monos_.size(); ++k) {
      for (int j = 0; j < dim; ++j) {
        auto it = pos_.find(monos_[k] + unit_index(j));
        times_[k][j] = it == pos_.end() ? -1 : it->second;
      }
    }
  }

  std::size_t size() const { return monos_.size(); }
  const std::vector<Index>& monos() const { return monos_; }
  int position(const Index& a) const { return pos_.at(a); }

  struct Affine {
    double c0 = 0.0;
    std::array<double, kMaxDim> c{};
  };

  // out += scale * p * (a.c0 + a.c . y); products beyond the degree are dropped.
  void add_product(std::vector<double>& out, const std::vector<double>& p, const Affine& a, double scale) const {
    for (std::size_t k = 0; k < monos_.size(); ++k) {
      const double v = p[k] * scale;
      if (v == 0.0) continue;
      out[k] += v * a.c0;
      for (int j = 0; j < dim_; ++j)
        if (times_[k][j] >= 0) out[times_[k][j]] += v * a.c[j];
    }
  }

  // out += scale * p * y_j
  void add_times_variable(std::vector<double>& out, const std::vector<double>& p, int j, double scale) const {
    for (std::size_t k = 0; k < monos_.size(); ++k)
      if (p[k] != 0.0 && times_[k][j] >= 0) out[times_[k][j]] += scale * p[k];
  }

 private:
  int dim_;
  std::vector<Index> monos_;
  std::map<Index, int> pos_;
  std::vector<std::array<int, kMaxDim>> times_;
};

// Expansion of (y + c)^a for affine c, split by the number of c-factors: 0, 1, >= 2.
struct BinomialBuckets {
  std::vector<double> one;
  std::vector<double> many;
};

BinomialBuckets expand_shift(const PolyTable& table, const Index& a, const std::vector<PolyTable::Affine>& c, int dim) {
  const std::size_t n = table.size();
  std::vector<double> s0(n, 0.0), s1(n, 0.0), s2(n, 0.0);
  s0[table.position(zero_index())] = 1.0;
  for (int i = 0; i < dim; ++i) {
    for (int r = 0; r < a[i]; ++r) {
      std::vector<double> t0(n, 0.0), t1(n, 0.0), t2(n, 0.0);
      table.add_times_variable(t2, s2, i, 1.0);
      table.add_product(t2, s2, c[i], 1.0);
      table.add_product(t2, s1, c[i], 1.0);
      table.add_times_variable(t1, s1, i, 1.0);
      table.add_product(t1, s0, c[i], 1.0);
      table.add_times_variable(t0, s0, i, 1.0);
      s0.swap(t0);
      s1.swap(t1);
      s2.swap(t2);
    }
  }
  return {std::move(s1), std::move(s2)};
}

// sum_i a_i y^{a - e_i} v_i for affine v.
void add_gradient_dot(const PolyTable& table, std::vector<double>& out, const Index& a,
                      const std::vector<PolyTable::Affine>& v, int dim, double scale) {
  if (scale == 0.0) return;
  std::vector<double> mono(table.size(), 0.0);
  for (int i = 0; i < dim; ++i) {
    if (a[i] == 0) continue;
    Index b = a;
    b[i] -= 1;
    std::fill(mono.begin(), mono.end(), 0.0);
    mono[table.position(b)] = 1.0;
    table.add_product(out, mono, v[i], scale * a[i]);
  }
}

// e^{i t} - 1 and e^{i t} - 1 - i t without cancellation.
Complex expm1_i(double t) {
  const double h = std::sin(0.5 * t);
  return {-2.0 * h * h, std::sin(t)};
}

Complex expm1_i_minus_linear(double t) {
  const double h = std::sin(0.5 * t);
  double sin_minus = 0.0;
  if (std::abs(t) < 0.5) {
    // sin t - t = -t^3/3! + t^5/5! - ...
    double term = -t * t * t / 6.0;
    for (int k = 1; k < 12; ++k) {
      sin_minus += term;
      term *= -t * t / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
  } else {
    sin_minus = std::sin(t) - t;
  }
  return {-2.0 * h * h, sin_minus};
}

Complex mean_of_product(const TrigPolynomial& f, const TrigPolynomial& g) {
  Complex sum{};
  for (const auto& [n, c] : f.coeffs()) sum += c * g.coeff(negate(n));
  return sum;
}

TrigPolynomial constant_like(int dim, int cutoff, double v) { return TrigPolynomial::constant(dim, cutoff, v); }

}  // namespace

TrigMatrix action_hessian_at_zero(const FourierTaylor& Q) {
  const int d = Q.dim();
  TrigMatrix H(d, TrigVector(d, TrigPolynomial(d, Q.cutoff())));
  for (const auto& a : monomials_of_degree(d, 2)) {
    const TrigPolynomial q = Q.term(a);
    if (q.empty()) continue;
    int i = -1, j = -1;
    for (int k = 0; k < d; ++k) {
      if (a[k] == 2) i = j = k;
      if (a[k] == 1) (i < 0 ? i : j) = k;
    }
    if (i == j) {
      H[i][i] += 2.0 * q;
    } else {
      H[i][j] += q;
      H[j][i] += q;
    }
  }
  return H;
}

bool SymplecticStep::is_identity() const {
  if (scale == 0.0) return true;
  for (double v : b)
    if (v != 0.0) return false;
  if (!s.empty()) return false;
  for (const auto& f : beta)
    if (!f.empty()) return false;
  return true;
}

CompiledStep::CompiledStep(const SymplecticStep& step, bool second_derivatives)
    : spec(step.dim(), std::max(step.s.cutoff(), step.beta.empty() ? 0 : step.beta[0].cutoff())),
      dim(step.dim()),
      scale(step.scale),
      identity(step.is_identity()),
      b(step.b) {
  for (int j = 0; j < dim; ++j) {
    beta.push_back(spec.pack(step.beta[j]));
    ds.push_back(spec.pack_derivative(step.s, j));
  }
  dbeta.assign(dim, {});
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) dbeta[i].push_back(spec.pack_derivative(step.beta[j], i));
  if (!second_derivatives) return;
  dds.assign(dim, {});
  ddbeta.assign(dim, std::vector<std::vector<std::vector<Complex>>>(dim));
  for (int i = 0; i < dim; ++i) {
    const TrigPolynomial si = derivative(step.s, i);
    for (int l = 0; l < dim; ++l) {
      dds[i].push_back(spec.pack_derivative(si, l));
      for (int j = 0; j < dim; ++j) ddbeta[i][l].push_back(spec.pack_derivative(derivative(step.beta[j], i), l));
    }
  }
}

Point CompiledStep::solve_shift(std::span<const double> x_new, std::vector<Complex>& w) const {
  Point delta{};
  Point x{};
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; !identity && it < 60; ++it) {
    for (int j = 0; j < dim; ++j) x[j] = x_new[j] + delta[j];
    spec.phases(x, w);
    SmallMatrix J(dim, dim);
    Eigen::VectorXd F(dim);
    for (int j = 0; j < dim; ++j) {
      F(j) = delta[j] + scale * HalfSpectrum::apply(beta[j], w);
      for (int i = 0; i < dim; ++i) J(j, i) = (i == j ? 1.0 : 0.0) + scale * HalfSpectrum::apply(dbeta[i][j], w);
    }
    const Eigen::VectorXd step = J.partialPivLu().solve(F);
    double size = 0.0;
    for (int j = 0; j < dim; ++j) {
      delta[j] -= step(j);
      size = std::max(size, std::abs(step(j)));
    }
    double ref = 1e-300;
    for (int j = 0; j < dim; ++j) ref = std::max(ref, std::abs(delta[j]));
    // Stop at roundoff: tiny correction, or corrections no longer shrinking.
    if (size <= 1e-16 * ref || (size >= previous && size <= 1e-12 * ref)) break;
    if (it == 59) fail(ErrorKind::StripOverflow, "inverse angle map did not converge");
    previous = size;
  }
  for (int j = 0; j < dim; ++j) x[j] = x_new[j] + delta[j];
  spec.phases(x, w);
  return delta;
}

void CompiledStep::apply(std::span<const double> y_new, std::span<const double> x_new, double* y, double* x) const {
  if (identity) {
    for (int j = 0; j < dim; ++j) {
      y[j] = y_new[j];
      x[j] = x_new[j];
    }
    return;
  }
  std::vector<Complex> w;
  const Point delta = solve_shift(x_new, w);
  for (int i = 0; i < dim; ++i) {
    double eta = b[i] + HalfSpectrum::apply(ds[i], w);
    for (int j = 0; j < dim; ++j) eta += HalfSpectrum::apply(dbeta[i][j], w) * y_new[j];
    y[i] = y_new[i] + scale * eta;
    x[i] = x_new[i] + delta[i];
  }
}

Eigen::MatrixXd CompiledStep::jacobian(std::span<const double> y_new, std::span<const double> x_new) const {
  const int d = dim;
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(2 * d, 2 * d);
  if (identity) return J;
  require(!dds.empty(), ErrorKind::InvalidArgument, "step compiled without second derivatives");
  std::vector<Complex> w;
  solve_shift(x_new, w);
  // x' = x + scale*beta(x)  =>  dx/dx' = (I + scale*Dbeta)^{-1}, (Dbeta)_{ji} = d_i beta_j
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      B(i, j) = HalfSpectrum::apply(dbeta[i][j], w);
      A(j, i) += scale * B(i, j);
    }
  const Eigen::MatrixXd dxdxn = A.inverse();
  // d/dx_l of (d_i s + sum_j d_i beta_j y'_j)
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      double g = HalfSpectrum::apply(dds[i][l], w);
      for (int j = 0; j < d; ++j) g += HalfSpectrum::apply(ddbeta[i][l][j], w) * y_new[j];
      G(i, l) = g;
    }
  J.topLeftCorner(d, d) += scale * B;
  J.topRightCorner(d, d) = scale * G * dxdxn;
  J.bottomRightCorner(d, d) = dxdxn;
  return J;
}

Point SymplecticStep::inverse_angle(std::span<const double> x_new) const {
  CompiledStep ev(*this, false);
  std::vector<Complex> w;
  const Point delta = ev.solve_shift(x_new, w);
  Point x{};
  for (int j = 0; j < dim(); ++j) x[j] = x_new[j] + delta[j];
  return x;
}

void SymplecticStep::apply(std::span<const double> y_new, std::span<const double> x_new, double* y, double* x) const {
  CompiledStep(*this, false).apply(y_new, x_new, y, x);
}

Eigen::MatrixXd SymplecticStep::jacobian(std::span<const double> y_new, std::span<const double> x_new) const {
  return CompiledStep(*this, true).jacobian(y_new, x_new);
}

SymplecticStep build_step(const KolmogorovNormalForm& knf, const FourierTaylor& P, double scale, double gamma,
                          double tau, double delta, const StepOptions& options) {
  const int d = knf.dim();
  require(P.dim() == d, ErrorKind::DimensionMismatch, "perturbation dimension differs from normal form");
  require(delta > 0.0 && delta < knf.width, ErrorKind::InvalidArgument, "width loss must lie in (0, width)");
  const int N = std::max(P.cutoff(), knf.Q.cutoff());
  const std::span<const double> omega(knf.omega);

  SymplecticStep step;
  step.scale = scale;
  step.b.assign(d, 0.0);
  step.s = TrigPolynomial(d, N);
  step.beta = zero_vector(d, N);
  step.u = zero_vector(d, N);
  step.U.assign(d, zero_vector(d, N));
  step.alpha = zero_vector(d, N);
  step.width_in = knf.width;
  step.width_out = knf.width - delta;
  step.worst_divisor = std::numeric_limits<double>::infinity();

  const Eigen::MatrixXd avg = average_hessian(knf.Q);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(avg);
  const auto sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 0.0)) fail(ErrorKind::SingularAverage, "averaged Hessian is singular");
  step.condition = sv(0) / sv(sv.size() - 1);

  if (scale == 0.0 || P.empty()) return step;

  // s solves D_w s = -(P(0, .) - <P(0, .)>)
  const TrigPolynomial P00 = P.term(zero_index()).with_cutoff(N);
  TrigCohomology sol = solve_cohomological(P00.without_mean(), omega, tau);
  step.s = -1.0 * sol.solution;
  step.worst_divisor = std::min(step.worst_divisor, sol.worst_divisor);
  const TrigVector grad_s = gradient(step.s);

  const TrigMatrix Qyy = action_hessian_at_zero(knf.Q.with_cutoff(N));
  TrigVector Py(d);
  for (int i = 0; i < d; ++i) Py[i] = P.term(unit_index(i)).with_cutoff(N);

  // b = -T (<Q_yy(0, .) grad s> + <P_y(0, .)>)
  Eigen::VectorXd rhs(d);
  for (int i = 0; i < d; ++i) {
    Complex m = Py[i].mean();
    for (int j = 0; j < d; ++j) m += mean_of_product(Qyy[i][j], grad_s[j]);
    rhs(i) = m.real();
  }
  const Eigen::VectorXd b = -knf.T * rhs;
  for (int i = 0; i < d; ++i) step.b[i] = b(i);

  // beta solves D_w beta = -(Q_yy(0, .)(b + grad s) + P_y(0, .)), zero mean
  for (int i = 0; i < d; ++i) {
    TrigPolynomial v = Py[i];
    for (int j = 0; j < d; ++j)
      v += multiply(Qyy[i][j], grad_s[j] + constant_like(d, N, b(j)));
    TrigCohomology c = solve_cohomological(v.without_mean(), omega, tau);
    step.beta[i] = -1.0 * c.solution;
    step.worst_divisor = std::min(step.worst_divisor, c.worst_divisor);
  }
  if (step.worst_divisor < gamma * (1.0 - 1e-12))
    fail(ErrorKind::ResonantDivisor, "small divisor " + std::to_string(step.worst_divisor) + " below gamma " +
                                         std::to_string(gamma));

  double shift = 0.0;
  for (const auto& f : step.beta) shift = std::max(shift, f.weighted_l1(knf.width - 2.0 * delta / 3.0));
  if (std::abs(scale) * shift > options.strip_fraction * delta)
    fail(ErrorKind::StripOverflow, "angle shift " + std::to_string(std::abs(scale) * shift) + " exceeds " +
                                       std::to_string(options.strip_fraction * delta));

  // Explicit (u, U, alpha) by sampling the exact map on the grid.
  AngleGrid grid(d, product_grid_points(N));
  CompiledStep ev(step, false);
  std::vector<std::vector<double>> us(d, std::vector<double>(grid.size()));
  std::vector<std::vector<double>> as(d, std::vector<double>(grid.size()));
  std::vector<std::vector<std::vector<double>>> Us(d, std::vector<std::vector<double>>(d, std::vector<double>(grid.size())));
  std::vector<Complex> w;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point xn = grid.point(k);
    ev.solve_shift(xn, w);
    for (int i = 0; i < d; ++i) {
      us[i][k] = step.b[i] + HalfSpectrum::apply(ev.ds[i], w);
      as[i][k] = -HalfSpectrum::apply(ev.beta[i], w);
      for (int j = 0; j < d; ++j) Us[i][j][k] = HalfSpectrum::apply(ev.dbeta[i][j], w);
    }
  }
  for (int i = 0; i < d; ++i) {
    step.u[i] = grid.project_real(us[i], N);
    step.alpha[i] = grid.project_real(as[i], N);
    for (int j = 0; j < d; ++j) step.U[i][j] = grid.project_real(Us[i][j], N);
  }
  return step;
}

StepOutcome apply_step(const KolmogorovNormalForm& knf, const FourierTaylor& P, const SymplecticStep& step,
                       const ApplyOptions& options) {
  const int d = knf.dim();
  require(P.dim() == d && step.dim() == d, ErrorKind::DimensionMismatch, "apply_step: dimension mismatch");
  const double eps = step.scale;
  const int N = std::max(P.cutoff(), knf.Q.cutoff());
  const int D = std::max(P.degree(), knf.Q.degree());
  const double width_out = step.width_out;
  const double rho = options.radius;

  StepOutcome out;
  out.report.scale = eps;
  out.report.width_in = knf.width;
  out.report.width_loss = knf.width - width_out;
  out.report.worst_divisor = step.worst_divisor;
  out.report.condition = step.condition;
  out.report.norm_P_in = std::abs(eps) * norm(P, knf.width, rho).value;

  const FourierTaylor Q = knf.Q.reshaped(D, N, knf.width);
  const FourierTaylor Pn = P.reshaped(D, N, knf.width);

  if (eps == 0.0 || Pn.empty()) {
    out.knf = knf;
    out.knf.Q = Q.reshaped(D, N, width_out);
    out.knf.width = width_out;
    out.P = FourierTaylor(d, D, N, width_out);
    out.first_order = FourierTaylor(d, D, N, knf.width);
    return out;
  }

  // First-order term L1 = w.eta1 + Q_y.eta1 - beta.Q_x + P, eta1 = b + grad s(x') + B(x') y'.
  double residual = 0.0;
  FourierTaylor L1 = Pn;
  const TrigVector grad_s = gradient(step.s);
  for (int i = 0; i < d; ++i) {
    FourierTaylor eta(d, D, N, knf.width);
    eta.add_term(zero_index(), grad_s[i] + constant_like(d, N, step.b[i]));
    for (int j = 0; j < d; ++j) eta.add_term(unit_index(j), derivative(step.beta[j], i));
    L1 += knf.omega[i] * eta;
    L1 += mul(partial_action(Q, i), eta, &residual, rho);
    L1 -= mul(FourierTaylor::from_trig(step.beta[i], D, knf.width), partial_angle(Q, i), &residual, rho);
  }
  out.first_order = L1;

  const double E_tilde = L1.term(zero_index()).mean().real();
  FourierTaylor kill = L1.degree_part(0, 1);
  kill.add_term(zero_index(), constant_like(d, N, -E_tilde));
  for (const auto& [a, f] : kill.terms()) out.report.first_order_stray = std::max(out.report.first_order_stray, f.max_abs());

  // Remainder R2 = H o step - (E + w.y' + Q + eps*L1), sampled without cancellation.
  const PolyTable table(d, D);
  const HalfSpectrum spec(d, N);
  CompiledStep ev(step, false);
  require(ev.spec.cutoff() == N, ErrorKind::GridMismatch, "step was built at a different cutoff");

  struct Packed {
    Index a;
    std::vector<Complex> f;
    std::vector<std::vector<Complex>> grad;
  };
  std::vector<Packed> qs, ps;
  for (const auto& [a, f] : Q.terms()) {
    Packed pk{a, spec.pack(f), {}};
    for (int j = 0; j < d; ++j) pk.grad.push_back(spec.pack_derivative(f, j));
    qs.push_back(std::move(pk));
  }
  for (const auto& [a, f] : Pn.terms()) ps.push_back({a, spec.pack(f), {}});

  AngleGrid grid(d, product_grid_points(N));
  std::vector<std::vector<double>> samples(table.size(), std::vector<double>(grid.size(), 0.0));
  std::vector<Complex> w0_at_x, w0, w1, w2;
  std::vector<double> R(table.size());
  auto sum_w = [](const std::vector<Complex>& p, const std::vector<Complex>& w) { return HalfSpectrum::apply(p, w); };

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point xn = grid.point(k);
    const Point delta = ev.solve_shift(xn, w0_at_x);
    spec.phases(xn, w0);
    w1.resize(spec.size());
    w2.resize(spec.size());
    for (std::size_t m = 0; m < spec.size(); ++m) {
      const double t = dot(std::span<const double>(delta.data(), d), spec.modes()[m]);
      w1[m] = w0[m] * expm1_i(t);
      w2[m] = w0[m] * expm1_i_minus_linear(t);
    }

    // eta_hat (at x), eta_1 (at x') and their difference e, as affine functions of y'.
    std::vector<PolyTable::Affine> eta_hat(d), e(d), c(d);
    for (int i = 0; i < d; ++i) {
      const double ds0 = sum_w(ev.ds[i], w0);
      const double ds1 = sum_w(ev.ds[i], w1);
      eta_hat[i].c0 = step.b[i] + ds0 + ds1;
      e[i].c0 = ds1;
      for (int j = 0; j < d; ++j) {
        const double B0 = sum_w(ev.dbeta[i][j], w0);
        const double B1 = sum_w(ev.dbeta[i][j], w1);
        eta_hat[i].c[j] = B0 + B1;
        e[i].c[j] = B1;
      }
      c[i].c0 = eps * eta_hat[i].c0;
      for (int j = 0; j < d; ++j) c[i].c[j] = eps * eta_hat[i].c[j];
    }
    std::array<double, kMaxDim> beta_diff{};
    for (int j = 0; j < d; ++j) beta_diff[j] = sum_w(ev.beta[j], w1);

    std::fill(R.begin(), R.end(), 0.0);
    std::vector<double> one(table.size(), 0.0);
    one[table.position(zero_index())] = 1.0;
    for (int i = 0; i < d; ++i) table.add_product(R, one, e[i], eps * knf.omega[i]);

    for (const auto& q : qs) {
      const double q0 = sum_w(q.f, w0);
      const double q1 = sum_w(q.f, w1);
      const double q2 = sum_w(q.f, w2);
      const int pa = table.position(q.a);
      const BinomialBuckets buckets = expand_shift(table, q.a, c, d);
      for (std::size_t m = 0; m < table.size(); ++m) R[m] += (q0 + q1) * buckets.many[m];
      add_gradient_dot(table, R, q.a, eta_hat, d, eps * q1);
      add_gradient_dot(table, R, q.a, e, d, eps * q0);
      double shift = 0.0;
      for (int j = 0; j < d; ++j) shift += beta_diff[j] * sum_w(q.grad[j], w0);
      R[pa] += q2 - eps * shift;
    }
    for (const auto& p : ps) {
      const double p0 = sum_w(p.f, w0);
      const double p1 = sum_w(p.f, w1);
      const BinomialBuckets buckets = expand_shift(table, p.a, c, d);
      for (std::size_t m = 0; m < table.size(); ++m) R[m] += eps * (p0 + p1) * (buckets.one[m] + buckets.many[m]);
      R[table.position(p.a)] += eps * p1;
    }
    for (std::size_t m = 0; m < table.size(); ++m) samples[m][k] = R[m];
  }

  // Split: E' = E + eps*E~, Q' = Q + eps*L1_{>=2}, eps^2 P' = R2 + eps*(L1_{<=1} - E~).
  const double eps2 = eps * eps;
  FourierTaylor Pout(d, D, N, width_out);
  double tail = 0.0;
  for (std::size_t m = 0; m < table.size(); ++m) {
    TrigPolynomial f = grid.project_real(samples[m], N, &tail);
    f *= 1.0 / eps2;
    Pout.add_term(table.monos()[m], f);
  }
  FourierTaylor kill_scaled = kill;
  kill_scaled *= 1.0 / eps;
  Pout += kill_scaled.reshaped(D, N, width_out);
  Pout.set_width(width_out);
  out.report.truncation_residual = std::abs(eps) * residual + tail;

  FourierTaylor Qout = Q + eps * L1.degree_part(2, D);
  Qout.set_width(width_out);
  out.knf = make_normal_form(knf.E + eps * E_tilde, knf.omega, Qout.reshaped(D, N, width_out), width_out, knf.radius);
  out.P = std::move(Pout);
  out.report.norm_P_out = eps2 * norm(out.P, width_out, rho).value;
  if (options.throw_on_growth && out.report.norm_P_out >= out.report.norm_P_in)
    fail(ErrorKind::BudgetExceeded, "perturbation grew from " + std::to_string(out.report.norm_P_in) + " to " +
                                        std::to_string(out.report.norm_P_out));
  return out;
}

}  // namespace kam
