#include "kam/lindstedt.hpp"

#include <cmath>
#include <map>

#include "kam/angle_grid.hpp"
#include "kam/diophantine.hpp"
#include "kam/error.hpp"
#include "kam/half_spectrum.hpp"
#include "kam/kolmogorov_step.hpp"

namespace kam {

namespace {

// Truncated power series in eps.
using Jet = std::vector<double>;
using ComplexJet = std::vector<Complex>;

void mul_acc(const Jet& a, const Jet& b, Jet& out, double s = 1.0) {
  const std::size_t K = out.size();
  for (std::size_t i = 0; i < K; ++i) {
    if (a[i] == 0.0) continue;
    const double ai = s * a[i];
    for (std::size_t j = 0; i + j < K; ++j) out[i + j] += ai * b[j];
  }
}

// e^{i z(eps)} for z(0) = 0, from m E_m = sum_j j (i z_j) E_{m-j}.
void exp_i(const Jet& z, ComplexJet& E) {
  const std::size_t K = z.size();
  E.assign(K, Complex{});
  E[0] = 1.0;
  for (std::size_t m = 1; m < K; ++m) {
    Complex s{};
    for (std::size_t j = 1; j <= m; ++j) s += double(j) * z[j] * E[m - j];
    E[m] = Complex(0.0, 1.0) * s / double(m);
  }
}

// Sparse term list of a series f(y, x) = sum_a y^a Re(sum_n c_{a,n} e^{i n.x}) over canonical n,
// evaluated at jets y(eps) and x(eps) = theta + dx(eps).
class SeriesJets {
 public:
  explicit SeriesJets(const FourierTaylor& f) : dim_(f.dim()) {
    for (const Index& a : monomials(dim_, f.degree())) {
      position_[a] = static_cast<int>(monos_.size());
      monos_.push_back(a);
    }
    for (std::size_t p = 1; p < monos_.size(); ++p) {
      int axis = 0;
      while (monos_[p][axis] == 0) ++axis;
      Index parent = monos_[p];
      parent[axis] -= 1;
      parent_.push_back({position_.at(parent), axis});
    }
    const HalfSpectrum spec(dim_, f.cutoff());
    std::map<Index, int> mode_pos;
    for (const auto& [a, poly] : f.terms()) {
      const auto packed = spec.pack(poly);
      for (std::size_t k = 0; k < packed.size(); ++k) {
        if (packed[k] == Complex{}) continue;
        const Index& n = spec.modes()[k];
        auto [it, fresh] = mode_pos.try_emplace(n, static_cast<int>(modes_.size()));
        if (fresh) modes_.push_back(n);
        Term t{a, it->second, position_.at(a), {}, packed[k]};
        for (int j = 0; j < dim_; ++j) {
          t.lower[j] = -1;
          if (a[j] > 0) {
            Index b = a;
            b[j] -= 1;
            t.lower[j] = position_.at(b);
          }
        }
        terms_.push_back(t);
      }
    }
  }

  // Accumulates grad_y f and grad_x f (jets of length y[0].size()).
  void gradients(const Point& theta, const std::vector<Jet>& y, const std::vector<Jet>& dx, std::vector<Jet>& gy,
                 std::vector<Jet>& gx) const {
    const std::size_t K = y[0].size();
    std::vector<Jet> mono(monos_.size(), Jet(K, 0.0));
    mono[0][0] = 1.0;
    for (std::size_t p = 1; p < monos_.size(); ++p) mul_acc(mono[parent_[p - 1].first], y[parent_[p - 1].second], mono[p]);
    std::vector<ComplexJet> phase(modes_.size());
    Jet z(K);
    for (std::size_t m = 0; m < modes_.size(); ++m) {
      std::fill(z.begin(), z.end(), 0.0);
      double arg = 0.0;
      for (int j = 0; j < dim_; ++j) {
        arg += modes_[m][j] * theta[j];
        for (std::size_t k = 1; k < K; ++k) z[k] += modes_[m][j] * dx[j][k];
      }
      exp_i(z, phase[m]);
      const Complex base = std::polar(1.0, arg);
      for (auto& e : phase[m]) e *= base;
    }
    Jet re(K), im(K);
    for (const Term& t : terms_) {
      const ComplexJet& ph = phase[t.mode];
      for (std::size_t k = 0; k < K; ++k) {
        const Complex c = t.c * ph[k];
        re[k] = c.real();
        im[k] = c.imag();
      }
      const Index& n = modes_[t.mode];
      for (int j = 0; j < dim_; ++j) {
        // d/dx_j Re(c e^{i n.x}) = -n_j Im(c e^{i n.x})
        if (n[j] != 0) mul_acc(im, mono[t.mono], gx[j], -double(n[j]));
        if (t.lower[j] >= 0) mul_acc(re, mono[t.lower[j]], gy[j], double(t.a[j]));
      }
    }
  }

 private:
  struct Term {
    Index a;
    int mode;
    int mono;
    std::array<int, kMaxDim> lower;
    Complex c;
  };
  int dim_;
  std::vector<Index> monos_;
  std::map<Index, int> position_;
  std::vector<std::pair<int, int>> parent_;
  std::vector<Index> modes_;
  std::vector<Term> terms_;
};

double grid_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Trig vector sum_k eps^{k-1} f_k packed per canonical mode as coefficient jets.
struct PackedSeries {
  std::vector<Index> modes;
  // [component][mode] -> jet in eps (index k-1 holds order k)
  std::vector<std::vector<ComplexJet>> coeff;
};

PackedSeries pack_series(const LindstedtSeries& s, bool alpha, std::size_t K) {
  const int d = s.dim();
  const HalfSpectrum spec(d, s.cutoff);
  PackedSeries out;
  std::vector<std::vector<std::vector<Complex>>> packed(d);
  for (int j = 0; j < d; ++j)
    for (const auto& o : s.orders) packed[j].push_back(spec.pack(alpha ? o.alpha[j] : o.u[j]));
  out.coeff.resize(d);
  for (std::size_t m = 0; m < spec.size(); ++m) {
    bool any = false;
    for (int j = 0; j < d && !any; ++j)
      for (const auto& p : packed[j]) any = any || p[m] != Complex{};
    if (!any) continue;
    out.modes.push_back(spec.modes()[m]);
    for (int j = 0; j < d; ++j) {
      ComplexJet c(K, Complex{});
      for (std::size_t k = 0; k < packed[j].size() && k < K; ++k) c[k] = packed[j][k][m];
      out.coeff[j].push_back(c);
    }
  }
  return out;
}

// Re sum_n c_n(eps) e^{i n.(x + dtheta(eps))} per component.
void evaluate_series(const PackedSeries& s, const Point& x, const std::vector<Jet>& dtheta, std::vector<Jet>& out) {
  const int d = static_cast<int>(dtheta.size());
  const std::size_t K = dtheta[0].size();
  for (auto& o : out) std::fill(o.begin(), o.end(), 0.0);
  Jet z(K);
  ComplexJet E;
  for (std::size_t m = 0; m < s.modes.size(); ++m) {
    std::fill(z.begin(), z.end(), 0.0);
    double arg = 0.0;
    for (int j = 0; j < d; ++j) {
      arg += s.modes[m][j] * x[j];
      for (std::size_t k = 1; k < K; ++k) z[k] += s.modes[m][j] * dtheta[j][k];
    }
    exp_i(z, E);
    const Complex base = std::polar(1.0, arg);
    for (auto& e : E) e *= base;
    for (int j = 0; j < d; ++j) {
      const ComplexJet& c = s.coeff[j][m];
      for (std::size_t a = 0; a < K; ++a) {
        if (c[a] == Complex{}) continue;
        for (std::size_t b = 0; a + b < K; ++b) out[j][a + b] += (c[a] * E[b]).real();
      }
    }
  }
}

}  // namespace

LindstedtSeries expand(const LocalizedProblem& localized, double gamma, double tau, int max_order) {
  require(max_order >= 1, ErrorKind::InvalidArgument, "need at least one order");
  const int d = localized.dim();
  const int N = localized.knf.Q.cutoff();
  const auto& omega = localized.omega();
  const auto dio = check(omega, {gamma, tau, N});
  if (!dio.pass)
    fail(ErrorKind::ResonantDivisor, "frequency fails the Diophantine check at cutoff " + std::to_string(N) +
                                         " (margin " + std::to_string(dio.margin) + ")");

  LindstedtSeries series;
  series.omega = omega;
  series.cutoff = N;

  const AngleGrid grid(d, product_grid_points(N));
  const std::size_t G = grid.size();
  const SeriesJets Qj(localized.knf.Q);
  std::vector<SeriesJets> Pj;
  for (const auto& p : localized.P) Pj.emplace_back(p);

  // Q_yy(0, theta) on the grid.
  const TrigMatrix hess = action_hessian_at_zero(localized.knf.Q);
  std::vector<std::vector<std::vector<double>>> H(d, std::vector<std::vector<double>>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) H[i][j] = grid.sample_real(hess[i][j]);

  // Grid values of u_k, alpha_k.
  std::vector<std::vector<std::vector<double>>> ug, ag;
  for (int k = 1; k <= max_order; ++k) {
    const std::size_t K = k + 1;
    std::vector<std::vector<double>> Gv(d, std::vector<double>(G)), Fv(d, std::vector<double>(G));
    std::vector<Jet> y(d, Jet(K)), dx(d, Jet(K)), gy(d, Jet(K)), gx(d, Jet(K));
    for (std::size_t p = 0; p < G; ++p) {
      const Point theta = grid.point(p);
      for (int j = 0; j < d; ++j) {
        std::fill(y[j].begin(), y[j].end(), 0.0);
        std::fill(dx[j].begin(), dx[j].end(), 0.0);
        for (int m = 1; m < k; ++m) {
          y[j][m] = ug[m - 1][j][p];
          dx[j][m] = ag[m - 1][j][p];
        }
      }
      // Q part: eps-coefficient k of Q_x and Q_y.
      for (auto& g : gy) std::fill(g.begin(), g.end(), 0.0);
      for (auto& g : gx) std::fill(g.begin(), g.end(), 0.0);
      Qj.gradients(theta, y, dx, gy, gx);
      for (int j = 0; j < d; ++j) {
        Gv[j][p] = -gx[j][k];
        Fv[j][p] = gy[j][k];
      }
      // eps * sum_i eps^i P_i: coefficient k - 1 - i of the gradients of P_i.
      for (std::size_t i = 0; i < Pj.size() && int(i) <= k - 1; ++i) {
        for (auto& g : gy) std::fill(g.begin(), g.end(), 0.0);
        for (auto& g : gx) std::fill(g.begin(), g.end(), 0.0);
        Pj[i].gradients(theta, y, dx, gy, gx);
        for (int j = 0; j < d; ++j) {
          Gv[j][p] -= gx[j][k - 1 - i];
          Fv[j][p] += gy[j][k - 1 - i];
        }
      }
    }

    LindstedtOrder order;
    std::vector<std::vector<double>> uk(d), akv(d);
    Eigen::VectorXd rhs(d);
    for (int j = 0; j < d; ++j) {
      const double mean = grid_mean(Gv[j]);
      if (std::abs(mean) > 1e-9 * std::max(1.0, max_abs(Gv[j])))
        fail(ErrorKind::SecularTerm, "order " + std::to_string(k) + ": action equation has average " +
                                         std::to_string(mean) + " in component " + std::to_string(j));
      const auto sol = solve_cohomological(grid.project_real(Gv[j], N).without_mean(), omega, tau);
      series.worst_divisor = std::min(series.worst_divisor, sol.worst_divisor);
      order.u.push_back(sol.solution);
      uk[j] = grid.sample_real(sol.solution);
    }
    // Constant part c_k = -T(<Q_yy u~_k> + <F~>) makes the angle equation solvable.
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t p = 0; p < G; ++p) {
        double v = Fv[i][p];
        for (int j = 0; j < d; ++j) v += H[i][j][p] * uk[j][p];
        s += v;
      }
      rhs(i) = s / G;
    }
    const Eigen::VectorXd c = -localized.knf.T * rhs;
    for (int j = 0; j < d; ++j) {
      order.u[j].add(zero_index(), c(j));
      for (auto& v : uk[j]) v += c(j);
    }
    for (int i = 0; i < d; ++i) {
      std::vector<double> R(G);
      for (std::size_t p = 0; p < G; ++p) {
        R[p] = Fv[i][p];
        for (int j = 0; j < d; ++j) R[p] += H[i][j][p] * uk[j][p];
      }
      const double mean = grid_mean(R);
      if (std::abs(mean) > 1e-9 * std::max(1.0, max_abs(R)))
        fail(ErrorKind::SecularTerm, "order " + std::to_string(k) + ": angle equation has average " +
                                         std::to_string(mean) + " in component " + std::to_string(i));
      const auto sol = solve_cohomological(grid.project_real(R, N).without_mean(), omega, tau);
      series.worst_divisor = std::min(series.worst_divisor, sol.worst_divisor);
      order.alpha.push_back(sol.solution);
      akv[i] = grid.sample_real(sol.solution);
    }
    ug.push_back(std::move(uk));
    ag.push_back(std::move(akv));
    series.orders.push_back(std::move(order));
  }
  if (max_order >= 4) series.radius_estimate = radius_estimate(series);
  return series;
}

double residual(const LindstedtSeries& series, const LocalizedProblem& localized, double eps, int order) {
  const int d = series.dim();
  const int K = order < 0 ? series.max_order() : std::min(order, series.max_order());
  const FourierTaylor H = localized.hamiltonian(eps);
  const int N = series.cutoff;
  std::vector<FourierTaylor> dHy, dHx;
  for (int j = 0; j < d; ++j) {
    dHy.push_back(partial_action(H, j));
    dHx.push_back(partial_angle(H, j));
  }
  // d/dt of the partial sums along the linear flow.
  TrigVector U = zero_vector(d, N), A = zero_vector(d, N);
  for (int k = K; k >= 1; --k)
    for (int j = 0; j < d; ++j) {
      U[j] *= eps;
      U[j] += series.orders[k - 1].u[j];
      A[j] *= eps;
      A[j] += series.orders[k - 1].alpha[j];
    }
  TrigVector dU, dA;
  for (int j = 0; j < d; ++j) {
    dU.push_back(directional_derivative(U[j], series.omega));
    dA.push_back(directional_derivative(A[j], series.omega));
  }
  const AngleGrid grid(d, product_grid_points(N));
  double worst = 0.0;
  std::vector<double> y(d), x(d);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Point theta = grid.point(p);
    Phases ph(theta, d, N);
    for (int j = 0; j < d; ++j) {
      y[j] = eps * ph.evaluate(U[j]);
      x[j] = theta[j] + eps * ph.evaluate(A[j]);
    }
    for (int j = 0; j < d; ++j) {
      const double ry = eps * ph.evaluate(dU[j]) + dHx[j].evaluate(y, x);
      // The x-equation is compared without the common term w_j.
      const double rx = eps * ph.evaluate(dA[j]) - (dHy[j].evaluate(y, x) - series.omega[j]);
      worst = std::max({worst, std::abs(ry), std::abs(rx)});
    }
  }
  return worst;
}

std::vector<TrigVector> graph_orders(const LindstedtSeries& series) {
  const int d = series.dim();
  const int N = series.cutoff;
  const int Kmax = series.max_order();
  std::vector<TrigVector> out(Kmax);
  if (Kmax == 0) return out;
  const std::size_t K = Kmax + 1;
  const PackedSeries alpha = pack_series(series, true, K);
  const PackedSeries u = pack_series(series, false, K);
  const AngleGrid grid(d, product_grid_points(N));
  std::vector<std::vector<std::vector<double>>> values(Kmax, std::vector<std::vector<double>>(d, std::vector<double>(grid.size())));
  std::vector<Jet> dtheta(d, Jet(K)), a(d, Jet(K)), g(d, Jet(K));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Point x = grid.point(p);
    for (auto& t : dtheta) std::fill(t.begin(), t.end(), 0.0);
    // theta(x) = x - eps alpha(theta(x)); each pass fixes one more order.
    for (int it = 0; it < Kmax; ++it) {
      evaluate_series(alpha, x, dtheta, a);
      for (int j = 0; j < d; ++j) {
        dtheta[j][0] = 0.0;
        for (std::size_t k = 1; k < K; ++k) dtheta[j][k] = -a[j][k - 1];
      }
    }
    evaluate_series(u, x, dtheta, g);
    for (int k = 1; k <= Kmax; ++k)
      for (int j = 0; j < d; ++j) values[k - 1][j][p] = g[j][k - 1];
  }
  for (int k = 0; k < Kmax; ++k)
    for (int j = 0; j < d; ++j) out[k].push_back(grid.project_real(values[k][j], N));
  return out;
}

namespace {

void require_compatible(const LindstedtSeries& series, const TorusResult& torus) {
  bool same = torus.dim() == series.dim();
  for (int j = 0; same && j < series.dim(); ++j) same = std::abs(torus.omega[j] - series.omega[j]) <= 1e-12;
  if (!same) fail(ErrorKind::GridMismatch, "torus and series have different frequencies");
  if (torus.graph.empty() || torus.graph[0].cutoff() != series.cutoff)
    fail(ErrorKind::GridMismatch, "torus graph and series use different cutoffs");
}

}  // namespace

std::vector<double> compare_to_newton(const LindstedtSeries& series, const TorusResult& torus) {
  require_compatible(series, torus);
  const int d = series.dim();
  const int N = series.cutoff;
  const auto g = graph_orders(series);
  const AngleGrid grid(d, product_grid_points(N));
  std::vector<double> out;
  TrigVector partial = zero_vector(d, N);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double ek = std::pow(torus.eps, double(k + 1));
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
      TrigPolynomial term = g[k][j];
      term *= ek;
      partial[j] += term;
      const auto diff = grid.sample_real(torus.graph[j] - partial[j]);
      worst = std::max(worst, max_abs(diff));
    }
    out.push_back(worst);
  }
  return out;
}

OrderFit fit_newton_orders(const LindstedtSeries& series, const std::vector<TorusResult>& tori, int max_order) {
  require(!tori.empty(), ErrorKind::InsufficientSamples, "no Newton tori to fit");
  require(max_order >= 1 && max_order <= series.max_order() && max_order <= int(tori.size()),
          ErrorKind::InsufficientOrders, "fit order exceeds the series or the number of tori");
  for (const auto& t : tori) require_compatible(series, t);
  const int d = series.dim();
  const int N = series.cutoff;
  const int m = static_cast<int>(tori.size());
  const auto g = graph_orders(series);
  const AngleGrid grid(d, product_grid_points(N));

  // Interpolation in s = eps/eps_ref with basis s^1..s^m.
  double ref = 0.0;
  for (const auto& t : tori) ref = std::max(ref, std::abs(t.eps));
  require(ref > 0.0, ErrorKind::InvalidArgument, "fit needs a nonzero eps");
  Eigen::MatrixXd V(m, m);
  OrderFit fit;
  for (int i = 0; i < m; ++i) {
    fit.eps.push_back(tori[i].eps);
    for (int k = 0; k < m; ++k) V(i, k) = std::pow(tori[i].eps / ref, k + 1);
  }
  const auto qr = V.colPivHouseholderQr();
  require(qr.rank() == m, ErrorKind::InvalidArgument, "fit needs distinct eps values");

  fit.relative_deviation.assign(max_order, 0.0);
  std::vector<double> scale(max_order, 0.0);
  std::vector<std::vector<double>> samples(m);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < m; ++i) samples[i] = grid.sample_real(tori[i].graph[j]);
    std::vector<std::vector<double>> lind(max_order);
    for (int k = 0; k < max_order; ++k) lind[k] = grid.sample_real(g[k][j]);
    Eigen::VectorXd b(m);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      for (int i = 0; i < m; ++i) b(i) = samples[i][p];
      const Eigen::VectorXd c = qr.solve(b);
      for (int k = 0; k < max_order; ++k) {
        const double coeff = c(k) / std::pow(ref, k + 1);
        fit.relative_deviation[k] = std::max(fit.relative_deviation[k], std::abs(coeff - lind[k][p]));
        scale[k] = std::max(scale[k], std::abs(lind[k][p]));
      }
    }
  }
  for (int k = 0; k < max_order; ++k)
    if (scale[k] > 0.0) fit.relative_deviation[k] /= scale[k];
  return fit;
}

std::vector<TorusResult> newton_family(const LocalizedProblem& localized, double eps, int count, double gamma,
                                       double tau, const Schedule& schedule, const RunOptions& options) {
  std::vector<TorusResult> out;
  for (int i = 0; i < count; ++i) out.push_back(run(localized, std::ldexp(eps, -i), gamma, tau, schedule, options));
  return out;
}

std::vector<double> order_norms(const LindstedtSeries& series, double width) {
  std::vector<double> out;
  for (const auto& o : series.orders) {
    double s = 0.0;
    for (int j = 0; j < series.dim(); ++j) s += o.u[j].weighted_l1(width) + o.alpha[j].weighted_l1(width);
    out.push_back(s);
  }
  return out;
}

double radius_estimate(const std::vector<double>& norms) {
  require(norms.size() >= 4, ErrorKind::InsufficientOrders, "radius estimate needs at least 4 orders");
  std::vector<double> k, v;
  for (std::size_t i = 0; i < norms.size(); ++i)
    if (norms[i] > 0.0) {
      k.push_back(double(i + 1));
      v.push_back(std::log(norms[i]));
    }
  if (k.empty()) return std::numeric_limits<double>::infinity();
  if (k.size() == 1) return std::numeric_limits<double>::infinity();
  double mk = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    mk += k[i];
    mv += v[i];
  }
  mk /= k.size();
  mv /= k.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    sxy += (k[i] - mk) * (v[i] - mv);
    sxx += (k[i] - mk) * (k[i] - mk);
  }
  return std::exp(-sxy / sxx);
}

double radius_estimate(const LindstedtSeries& series, double width) {
  return radius_estimate(order_norms(series, width));
}

}  // namespace kam
