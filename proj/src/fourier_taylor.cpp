#include "kam/fourier_taylor.hpp"

#include <cmath>
#include <limits>

#include "kam/angle_grid.hpp"
#include "kam/error.hpp"

namespace kam {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double power(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

FourierTaylor::FourierTaylor(int dim, int degree, int cutoff, double width)
    : dim_(dim), degree_(degree), cutoff_(cutoff), width_(width) {
  require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "dimension out of range");
  require(degree >= 0, ErrorKind::InvalidArgument, "negative action degree");
  require(cutoff >= 0, ErrorKind::InvalidArgument, "negative cutoff");
}

FourierTaylor FourierTaylor::from_trig(const TrigPolynomial& f, int degree, double width) {
  FourierTaylor g(f.dim(), degree, f.cutoff(), width);
  g.set_term(zero_index(), f);
  return g;
}

FourierTaylor FourierTaylor::monomial(int dim, int degree, int cutoff, const Index& a, double c) {
  FourierTaylor g(dim, degree, cutoff);
  g.set_term(a, TrigPolynomial::constant(dim, cutoff, c));
  return g;
}

TrigPolynomial FourierTaylor::term(const Index& a) const {
  auto it = terms_.find(a);
  return it == terms_.end() ? TrigPolynomial(dim_, cutoff_) : it->second;
}

void FourierTaylor::set_term(const Index& a, TrigPolynomial f) {
  require(l1(a) <= degree_, ErrorKind::InvalidArgument, "action multi-index beyond degree");
  if (f.empty()) {
    terms_.erase(a);
    return;
  }
  require(f.dim() == dim_, ErrorKind::DimensionMismatch, "term dimension differs from series");
  require(f.cutoff() <= cutoff_, ErrorKind::InvalidArgument, "term cutoff exceeds series cutoff");
  TrigPolynomial g(dim_, cutoff_);
  g += f;
  terms_[a] = std::move(g);
}

void FourierTaylor::add_term(const Index& a, const TrigPolynomial& f) {
  if (f.empty()) return;
  require(f.cutoff() <= cutoff_, ErrorKind::InvalidArgument, "term cutoff exceeds series cutoff");
  auto it = terms_.find(a);
  if (it == terms_.end()) {
    set_term(a, f);
    return;
  }
  it->second += f;
  if (it->second.empty()) terms_.erase(it);
}

double FourierTaylor::evaluate(std::span<const double> y, std::span<const double> x) const {
  require(static_cast<int>(y.size()) >= dim_ && static_cast<int>(x.size()) >= dim_, ErrorKind::DimensionMismatch,
          "evaluation point dimension");
  Phases phases(x, dim_, cutoff_);
  double sum = 0.0;
  for (const auto& [a, f] : terms_) {
    double ya = 1.0;
    for (int j = 0; j < dim_; ++j) ya *= power(y[j], a[j]);
    sum += ya * phases.evaluate(f);
  }
  return sum;
}

void FourierTaylor::check_dim(const FourierTaylor& g) const {
  require(dim_ == g.dim_, ErrorKind::DimensionMismatch,
          "series dimensions " + std::to_string(dim_) + " and " + std::to_string(g.dim_));
}

FourierTaylor& FourierTaylor::operator+=(const FourierTaylor& g) {
  if (dim_ == 0) return *this = g;
  if (g.dim_ == 0) return *this;
  check_dim(g);
  degree_ = std::max(degree_, g.degree_);
  cutoff_ = std::max(cutoff_, g.cutoff_);
  for (auto& [a, f] : terms_) f = f.with_cutoff(cutoff_);
  for (const auto& [a, f] : g.terms_) add_term(a, f);
  return *this;
}

FourierTaylor& FourierTaylor::operator-=(const FourierTaylor& g) {
  FourierTaylor neg = g;
  neg *= -1.0;
  return *this += neg;
}

FourierTaylor& FourierTaylor::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [a, f] : terms_) f *= s;
  return *this;
}

FourierTaylor FourierTaylor::degree_part(int lo, int hi) const {
  FourierTaylor g(dim_, degree_, cutoff_, width_);
  for (const auto& [a, f] : terms_)
    if (l1(a) >= lo && l1(a) <= hi) g.terms_.emplace(a, f);
  return g;
}

FourierTaylor FourierTaylor::with_cutoff(int cutoff) const {
  FourierTaylor g(dim_, degree_, cutoff, width_);
  for (const auto& [a, f] : terms_) g.set_term(a, f.with_cutoff(cutoff));
  return g;
}

FourierTaylor FourierTaylor::reshaped(int degree, int cutoff, double width) const {
  FourierTaylor g(dim_, degree, cutoff, width);
  for (const auto& [a, f] : terms_)
    if (l1(a) <= degree) g.set_term(a, f.with_cutoff(cutoff));
  return g;
}

FourierTaylor FourierTaylor::pruned(double threshold) const {
  FourierTaylor g(dim_, degree_, cutoff_, width_);
  for (const auto& [a, f] : terms_) g.set_term(a, f.pruned(threshold));
  return g;
}

int FourierTaylor::max_mode() const {
  int m = 0;
  for (const auto& [a, f] : terms_)
    for (const auto& [n, c] : f.coeffs()) m = std::max(m, linf(n));
  return m;
}

double FourierTaylor::reality_defect() const {
  double m = 0.0;
  for (const auto& [a, f] : terms_) m = std::max(m, f.reality_defect());
  return m;
}

double FourierTaylor::max_abs() const {
  double m = 0.0;
  for (const auto& [a, f] : terms_) m = std::max(m, f.max_abs());
  return m;
}

FourierTaylor operator+(FourierTaylor f, const FourierTaylor& g) {
  f += g;
  return f;
}

FourierTaylor operator-(FourierTaylor f, const FourierTaylor& g) {
  f -= g;
  return f;
}

FourierTaylor operator*(double s, FourierTaylor f) {
  f *= s;
  return f;
}

FourierTaylor add(const FourierTaylor& f, const FourierTaylor& g) { return f + g; }

FourierTaylor mul(const FourierTaylor& f, const FourierTaylor& g, double* residual, double rho) {
  require(f.dim() == g.dim(), ErrorKind::DimensionMismatch, "mul: dimension mismatch");
  const int degree = std::max(f.degree(), g.degree());
  const int cutoff = std::max(f.cutoff(), g.cutoff());
  const double width = f.width();
  FourierTaylor out(f.dim(), degree, cutoff, width);
  double dropped = 0.0;
  for (const auto& [a, fa] : f.terms()) {
    for (const auto& [b, gb] : g.terms()) {
      const Index c = a + b;
      if (l1(c) > degree) {
        dropped += power(rho, l1(c)) * fa.weighted_l1(width) * gb.weighted_l1(width);
        continue;
      }
      double local = 0.0;
      out.add_term(c, multiply(fa.with_cutoff(cutoff), gb, &local, width));
      dropped += power(rho, l1(c)) * local;
    }
  }
  if (residual) *residual += dropped;
  return out;
}

FourierTaylor partial_action(const FourierTaylor& f, int axis) {
  require(axis >= 0 && axis < f.dim(), ErrorKind::InvalidArgument, "partial_action axis out of range");
  FourierTaylor out(f.dim(), f.degree(), f.cutoff(), f.width());
  for (const auto& [a, fa] : f.terms()) {
    if (a[axis] == 0) continue;
    Index b = a;
    b[axis] -= 1;
    out.add_term(b, static_cast<double>(a[axis]) * fa);
  }
  return out;
}

FourierTaylor partial_angle(const FourierTaylor& f, int axis) {
  require(axis >= 0 && axis < f.dim(), ErrorKind::InvalidArgument, "partial_angle axis out of range");
  FourierTaylor out(f.dim(), f.degree(), f.cutoff(), f.width());
  for (const auto& [a, fa] : f.terms()) out.set_term(a, derivative(fa, axis));
  return out;
}

FourierTaylor average(const FourierTaylor& f) {
  FourierTaylor out(f.dim(), f.degree(), f.cutoff(), f.width());
  for (const auto& [a, fa] : f.terms()) {
    TrigPolynomial m(f.dim(), f.cutoff());
    m.set(zero_index(), fa.mean());
    out.set_term(a, m);
  }
  return out;
}

Cohomology solve_cohomological(const FourierTaylor& f, std::span<const double> omega, double gamma, double tau) {
  Cohomology out{FourierTaylor(f.dim(), f.degree(), f.cutoff(), f.width()),
                 std::numeric_limits<double>::infinity(), zero_index(), true};
  for (const auto& [a, fa] : f.terms()) {
    TrigCohomology c = solve_cohomological(fa, omega, tau);
    out.solution.set_term(a, c.solution);
    if (c.worst_divisor < out.worst_divisor) {
      out.worst_divisor = c.worst_divisor;
      out.worst_mode = c.worst_mode;
    }
  }
  out.meets_gamma = out.worst_divisor >= gamma;
  return out;
}

AnalyticNorm norm(const FourierTaylor& f, double xi, double rho) {
  require(xi >= 0.0 && rho >= 0.0, ErrorKind::InvalidArgument, "norm needs nonnegative width and radius");
  double value = 0.0;
  for (const auto& [a, fa] : f.terms()) value += power(rho, l1(a)) * fa.weighted_l1(xi);
  return {value, xi, rho};
}

AngleComposition compose_angle_map(const FourierTaylor& f, const TrigVector& alpha, double eps, double delta) {
  require(static_cast<int>(alpha.size()) == f.dim(), ErrorKind::DimensionMismatch,
          "compose_angle_map: shift has wrong dimension");
  if (eps == 0.0) return {f, 0.0};
  const double xi = f.width();
  if (delta <= 0.0) delta = 0.5 * xi;
  double shift = 0.0;
  for (const auto& a : alpha) shift = std::max(shift, a.weighted_l1(std::max(0.0, xi - delta)));
  if (std::abs(eps) * shift > delta)
    fail(ErrorKind::StripOverflow, "angle shift " + std::to_string(std::abs(eps) * shift) +
                                       " exceeds width loss " + std::to_string(delta));

  const int cutoff = f.cutoff();
  int shift_cutoff = 0;
  for (const auto& a : alpha) shift_cutoff = std::max(shift_cutoff, a.cutoff());
  AngleGrid grid(f.dim(), product_grid_points(cutoff));
  std::map<Index, std::vector<double>> samples;
  for (const auto& [a, fa] : f.terms()) samples[a].resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point x = grid.point(k);
    Phases base(x, f.dim(), shift_cutoff);
    Point shifted = x;
    for (int j = 0; j < f.dim(); ++j) shifted[j] += eps * base.evaluate(alpha[j]);
    Phases phases(shifted, f.dim(), cutoff);
    for (const auto& [a, fa] : f.terms()) samples[a][k] = phases.evaluate(fa);
  }
  AngleComposition out{FourierTaylor(f.dim(), f.degree(), cutoff, xi), 0.0};
  for (const auto& [a, values] : samples) out.result.set_term(a, grid.project_real(values, cutoff, &out.aliasing_residual));
  return out;
}

FourierTaylor shift_action(const FourierTaylor& f, std::span<const double> y0) {
  require(static_cast<int>(y0.size()) >= f.dim(), ErrorKind::DimensionMismatch, "shift_action point dimension");
  FourierTaylor out(f.dim(), f.degree(), f.cutoff(), f.width());
  for (const auto& [a, fa] : f.terms()) {
    for (const auto& b : monomials(f.dim(), l1(a))) {
      bool below = true;
      double weight = 1.0;
      for (int j = 0; j < f.dim(); ++j) {
        if (b[j] > a[j]) {
          below = false;
          break;
        }
        weight *= binomial(a[j], b[j]) * power(y0[j], a[j] - b[j]);
      }
      if (below && weight != 0.0) out.add_term(b, weight * fa);
    }
  }
  return out;
}

TrigPolynomial at_zero_action(const FourierTaylor& f) { return f.term(zero_index()); }

}  // namespace kam
