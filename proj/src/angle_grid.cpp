#include "kam/angle_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "kam/error.hpp"

namespace kam {

namespace {

// FFTW planning is not thread safe; execution of an existing plan on new
// arrays is. Plans are created once per shape and kept for the process lifetime.
fftw_plan cached_plan(int dim, int points, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(dim, points, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= points;
  std::vector<Complex> in(n), out(n);
  int dims[kMaxDim];
  for (int k = 0; k < dim; ++k) dims[k] = points;
  fftw_plan plan = fftw_plan_dft(dim, dims, reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(key, plan);
  return plan;
}

int wrap(int n, int m) { return ((n % m) + m) % m; }

}  // namespace

AngleGrid::AngleGrid(int dim, int points) : dim_(dim), points_(points), size_(1) {
  require(dim >= 1 && dim <= kMaxDim, ErrorKind::InvalidArgument, "grid dimension out of range");
  require(points >= 1, ErrorKind::InvalidArgument, "grid needs at least one point per axis");
  for (int k = 0; k < dim; ++k) size_ *= static_cast<std::size_t>(points);
}

Point AngleGrid::point(std::size_t k) const {
  Point x{};
  for (int j = dim_ - 1; j >= 0; --j) {
    x[j] = 2.0 * std::numbers::pi * static_cast<double>(k % points_) / points_;
    k /= points_;
  }
  return x;
}

std::vector<Complex> AngleGrid::transform(std::span<const Complex> in, int sign) const {
  std::vector<Complex> out(size_);
  fftw_execute_dft(cached_plan(dim_, points_, sign),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<Complex> AngleGrid::sample(const TrigPolynomial& f) const {
  require(f.dim() == dim_, ErrorKind::GridMismatch, "sample: dimension differs from grid");
  require(points_ >= 2 * f.cutoff() + 1, ErrorKind::GridMismatch, "sample: grid too coarse for cutoff");
  std::vector<Complex> spectrum(size_);
  for (const auto& [n, c] : f.coeffs()) {
    std::size_t flat = 0;
    for (int j = 0; j < dim_; ++j) flat = flat * points_ + wrap(n[j], points_);
    spectrum[flat] += c;
  }
  return transform(spectrum, FFTW_BACKWARD);
}

std::vector<double> AngleGrid::sample_real(const TrigPolynomial& f) const {
  auto values = sample(f);
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = values[k].real();
  return out;
}

TrigPolynomial AngleGrid::project(std::span<const Complex> values, int cutoff, double* tail) const {
  require(values.size() == size_, ErrorKind::GridMismatch, "project: value count differs from grid size");
  require(points_ >= 2 * cutoff + 1, ErrorKind::GridMismatch, "project: grid too coarse for cutoff");
  auto spectrum = transform(values, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(size_);
  TrigPolynomial f(dim_, cutoff);
  double dropped = 0.0;
  for (std::size_t k = 0; k < size_; ++k) {
    Index n{};
    std::size_t rest = k;
    for (int j = dim_ - 1; j >= 0; --j) {
      int i = static_cast<int>(rest % points_);
      rest /= points_;
      n[j] = (2 * i > points_) ? i - points_ : i;
    }
    const Complex c = spectrum[k] * scale;
    if (linf(n) <= cutoff) {
      f.set(n, c);
    } else {
      dropped += std::abs(c);
    }
  }
  if (tail) *tail += dropped;
  return f;
}

TrigPolynomial AngleGrid::project_real(std::span<const double> values, int cutoff, double* tail) const {
  std::vector<Complex> data(values.begin(), values.end());
  TrigPolynomial raw = project(data, cutoff, tail);
  TrigPolynomial f(dim_, cutoff);
  for (const auto& [n, c] : raw.coeffs()) {
    if (!is_canonical(n)) continue;
    const Complex sym = 0.5 * (c + std::conj(raw.coeff(negate(n))));
    if (sym != Complex{}) f.set_real_pair(n, sym);
  }
  // Modes whose canonical partner was exactly zero still need their pair.
  for (const auto& [n, c] : raw.coeffs()) {
    if (is_canonical(n) || raw.coeff(negate(n)) != Complex{}) continue;
    f.set_real_pair(negate(n), 0.5 * std::conj(c));
  }
  return f;
}

}  // namespace kam
