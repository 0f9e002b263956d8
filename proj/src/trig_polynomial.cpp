#include "kam/trig_polynomial.hpp"

#include <cmath>
#include <limits>

#include "kam/error.hpp"

namespace kam {

namespace {

constexpr double kResonanceThreshold = 1e-14;
constexpr double kAverageThreshold = 1e-14;

std::size_t box_size(int dim, int cutoff) {
  std::size_t s = 1;
  for (int k = 0; k < dim; ++k) s *= static_cast<std::size_t>(2 * cutoff + 1);
  return s;
}

std::size_t box_flat(const Index& n, int dim, int cutoff) {
  std::size_t flat = 0;
  for (int k = 0; k < dim; ++k) flat = flat * (2 * cutoff + 1) + static_cast<std::size_t>(n[k] + cutoff);
  return flat;
}

Index box_unflat(std::size_t flat, int dim, int cutoff) {
  Index n{};
  const std::size_t side = 2 * cutoff + 1;
  for (int k = dim - 1; k >= 0; --k) {
    n[k] = static_cast<int>(flat % side) - cutoff;
    flat /= side;
  }
  return n;
}

}  // namespace

TrigPolynomial::TrigPolynomial(int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "dimension out of range");
  require(cutoff >= 0, ErrorKind::InvalidArgument, "negative cutoff");
}

TrigPolynomial TrigPolynomial::constant(int dim, int cutoff, double value) {
  TrigPolynomial f(dim, cutoff);
  if (value != 0.0) f.set(zero_index(), value);
  return f;
}

TrigPolynomial TrigPolynomial::cosine(int dim, int cutoff, const Index& n, double amplitude) {
  TrigPolynomial f(dim, cutoff);
  if (is_zero(n)) {
    f.set(n, amplitude);
  } else {
    f.set_real_pair(n, 0.5 * amplitude);
  }
  return f;
}

TrigPolynomial TrigPolynomial::sine(int dim, int cutoff, const Index& n, double amplitude) {
  TrigPolynomial f(dim, cutoff);
  if (!is_zero(n)) f.set_real_pair(n, Complex(0.0, -0.5 * amplitude));
  return f;
}

Complex TrigPolynomial::coeff(const Index& n) const {
  auto it = coeffs_.find(n);
  return it == coeffs_.end() ? Complex{} : it->second;
}

void TrigPolynomial::set(const Index& n, Complex c) {
  require(linf(n) <= cutoff_, ErrorKind::InvalidArgument, "mode beyond cutoff");
  if (c == Complex{}) {
    coeffs_.erase(n);
  } else {
    coeffs_[n] = c;
  }
}

void TrigPolynomial::add(const Index& n, Complex c) {
  if (c == Complex{}) return;
  require(linf(n) <= cutoff_, ErrorKind::InvalidArgument, "mode beyond cutoff");
  auto [it, inserted] = coeffs_.try_emplace(n, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex{}) coeffs_.erase(it);
  }
}

void TrigPolynomial::set_real_pair(const Index& n, Complex c) {
  if (is_zero(n)) {
    set(n, Complex(c.real(), 0.0));
    return;
  }
  set(n, c);
  set(negate(n), std::conj(c));
}

void TrigPolynomial::check_dim(const TrigPolynomial& g) const {
  require(dim_ == g.dim_, ErrorKind::DimensionMismatch,
          "trig polynomial dimensions " + std::to_string(dim_) + " and " + std::to_string(g.dim_));
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& g) {
  if (dim_ == 0) {
    *this = g;
    return *this;
  }
  if (g.dim_ == 0) return *this;
  check_dim(g);
  cutoff_ = std::max(cutoff_, g.cutoff_);
  for (const auto& [n, c] : g.coeffs_) add(n, c);
  return *this;
}

TrigPolynomial& TrigPolynomial::operator-=(const TrigPolynomial& g) {
  if (dim_ == 0) {
    *this = g;
    *this *= -1.0;
    return *this;
  }
  if (g.dim_ == 0) return *this;
  check_dim(g);
  cutoff_ = std::max(cutoff_, g.cutoff_);
  for (const auto& [n, c] : g.coeffs_) add(n, -c);
  return *this;
}

TrigPolynomial& TrigPolynomial::operator*=(double s) {
  if (s == 0.0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [n, c] : coeffs_) c *= s;
  return *this;
}

Complex TrigPolynomial::evaluate_complex(std::span<const double> x) const {
  Complex sum{};
  for (const auto& [n, c] : coeffs_) {
    const double phase = dot(x.first(dim_), n);
    sum += c * Complex(std::cos(phase), std::sin(phase));
  }
  return sum;
}

double TrigPolynomial::evaluate(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& [n, c] : coeffs_) {
    const double phase = dot(x.first(dim_), n);
    sum += c.real() * std::cos(phase) - c.imag() * std::sin(phase);
  }
  return sum;
}

TrigPolynomial TrigPolynomial::without_mean() const {
  TrigPolynomial f = *this;
  f.coeffs_.erase(zero_index());
  return f;
}

TrigPolynomial TrigPolynomial::with_cutoff(int cutoff) const {
  TrigPolynomial f(dim_, cutoff);
  for (const auto& [n, c] : coeffs_)
    if (linf(n) <= cutoff) f.coeffs_.emplace(n, c);
  return f;
}

TrigPolynomial TrigPolynomial::pruned(double threshold) const {
  TrigPolynomial f(dim_, cutoff_);
  for (const auto& [n, c] : coeffs_)
    if (std::abs(c) > threshold) f.coeffs_.emplace(n, c);
  return f;
}

double TrigPolynomial::max_abs() const {
  double m = 0.0;
  for (const auto& [n, c] : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double TrigPolynomial::reality_defect() const {
  double m = 0.0;
  for (const auto& [n, c] : coeffs_) m = std::max(m, std::abs(coeff(negate(n)) - std::conj(c)));
  return m;
}

double TrigPolynomial::weighted_l1(double width) const {
  double s = 0.0;
  for (const auto& [n, c] : coeffs_) s += std::abs(c) * std::exp(width * l1(n));
  return s;
}

TrigPolynomial operator+(TrigPolynomial f, const TrigPolynomial& g) {
  f += g;
  return f;
}

TrigPolynomial operator-(TrigPolynomial f, const TrigPolynomial& g) {
  f -= g;
  return f;
}

TrigPolynomial operator*(double s, TrigPolynomial f) {
  f *= s;
  return f;
}

TrigPolynomial multiply(const TrigPolynomial& f, const TrigPolynomial& g, double* residual, double width) {
  require(f.dim() == g.dim(), ErrorKind::DimensionMismatch, "multiply: dimension mismatch");
  const int dim = f.dim();
  const int cutoff = std::max(f.cutoff(), g.cutoff());
  TrigPolynomial out(dim, cutoff);
  if (f.empty() || g.empty()) return out;

  std::vector<Complex> buffer(box_size(dim, cutoff));
  std::vector<char> touched(buffer.size(), 0);
  double dropped = 0.0;
  for (const auto& [n, a] : f.coeffs()) {
    for (const auto& [m, b] : g.coeffs()) {
      const Index s = n + m;
      if (linf(s) > cutoff) {
        dropped += std::abs(a) * std::abs(b) * std::exp(width * l1(s));
        continue;
      }
      const std::size_t k = box_flat(s, dim, cutoff);
      buffer[k] += a * b;
      touched[k] = 1;
    }
  }
  for (std::size_t k = 0; k < buffer.size(); ++k)
    if (touched[k] && buffer[k] != Complex{}) out.set(box_unflat(k, dim, cutoff), buffer[k]);
  if (residual) *residual += dropped;
  return out;
}

TrigPolynomial derivative(const TrigPolynomial& f, int axis) {
  require(axis >= 0 && axis < f.dim(), ErrorKind::InvalidArgument, "derivative axis out of range");
  TrigPolynomial out(f.dim(), f.cutoff());
  for (const auto& [n, c] : f.coeffs())
    if (n[axis] != 0) out.set(n, c * Complex(0.0, n[axis]));
  return out;
}

TrigPolynomial directional_derivative(const TrigPolynomial& f, std::span<const double> omega) {
  require(static_cast<int>(omega.size()) == f.dim(), ErrorKind::DimensionMismatch,
          "frequency dimension does not match");
  TrigPolynomial out(f.dim(), f.cutoff());
  for (const auto& [n, c] : f.coeffs()) {
    const double w = dot(omega, n);
    if (w != 0.0) out.set(n, c * Complex(0.0, w));
  }
  return out;
}

TrigCohomology solve_cohomological(const TrigPolynomial& f, std::span<const double> omega, double tau) {
  require(static_cast<int>(omega.size()) == f.dim(), ErrorKind::DimensionMismatch,
          "frequency dimension does not match");
  if (std::abs(f.mean()) >= kAverageThreshold)
    fail(ErrorKind::NonzeroAverage, "right-hand side has average " + std::to_string(std::abs(f.mean())));
  TrigCohomology out{TrigPolynomial(f.dim(), f.cutoff()), std::numeric_limits<double>::infinity(), zero_index()};
  for (const auto& [n, c] : f.coeffs()) {
    if (is_zero(n)) continue;
    const double w = dot(omega, n);
    if (std::abs(w) < kResonanceThreshold) {
      std::string mode;
      for (int k = 0; k < f.dim(); ++k) mode += (k ? "," : "") + std::to_string(n[k]);
      fail(ErrorKind::ResonantDivisor, "|w.n| below threshold at n=(" + mode + ")");
    }
    out.solution.set(n, c / Complex(0.0, w));
    const double divisor = std::abs(w) * std::pow(static_cast<double>(l1(n)), tau);
    if (divisor < out.worst_divisor) {
      out.worst_divisor = divisor;
      out.worst_mode = n;
    }
  }
  return out;
}

Phases::Phases(std::span<const double> x, int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  for (int j = 0; j < dim; ++j) {
    auto& row = table_[j];
    row.resize(2 * cutoff + 1);
    row[cutoff] = 1.0;
    const Complex step(std::cos(x[j]), std::sin(x[j]));
    // Direct evaluation every few powers keeps the recurrence error bounded.
    for (int k = 1; k <= cutoff; ++k) {
      Complex z = (k % 8 == 0) ? Complex(std::cos(k * x[j]), std::sin(k * x[j])) : row[cutoff + k - 1] * step;
      row[cutoff + k] = z;
      row[cutoff - k] = std::conj(z);
    }
  }
}

double Phases::evaluate(const TrigPolynomial& f) const {
  double sum = 0.0;
  for (const auto& [n, c] : f.coeffs()) {
    const Complex z = (*this)(n);
    sum += c.real() * z.real() - c.imag() * z.imag();
  }
  return sum;
}

TrigVector gradient(const TrigPolynomial& f) {
  TrigVector g;
  g.reserve(f.dim());
  for (int j = 0; j < f.dim(); ++j) g.push_back(derivative(f, j));
  return g;
}

TrigVector zero_vector(int dim, int cutoff) { return TrigVector(dim, TrigPolynomial(dim, cutoff)); }

double max_abs(const TrigVector& v) {
  double m = 0.0;
  for (const auto& f : v) m = std::max(m, f.max_abs());
  return m;
}

}  // namespace kam
