#pragma once

#include <array>
#include <span>
#include <vector>

#include "kam/trig_polynomial.hpp"

namespace kam {

using Point = std::array<double, kMaxDim>;

/// Uniform tensor grid on T^d with m points per axis, stored row-major
/// (last axis fastest). Sampling and projection go through FFTW.
class AngleGrid {
 public:
  AngleGrid(int dim, int points);

  int dim() const { return dim_; }
  int points() const { return points_; }
  std::size_t size() const { return size_; }
  Point point(std::size_t k) const;

  /// Values of f at every grid point. Requires points >= 2*cutoff+1.
  std::vector<Complex> sample(const TrigPolynomial& f) const;
  std::vector<double> sample_real(const TrigPolynomial& f) const;

  /// Discrete Fourier projection onto |n|_inf <= cutoff. The l1 mass of the
  /// discrete coefficients beyond the cutoff is added to *tail if given.
  TrigPolynomial project(std::span<const Complex> values, int cutoff, double* tail = nullptr) const;
  /// Same for real data; the result satisfies the reality condition exactly.
  TrigPolynomial project_real(std::span<const double> values, int cutoff, double* tail = nullptr) const;

 private:
  std::vector<Complex> transform(std::span<const Complex> in, int sign) const;

  int dim_;
  int points_;
  std::size_t size_;
};

/// Grid resolution used for products of two band-limited factors without aliasing.
inline int product_grid_points(int cutoff) { return 3 * cutoff + 1; }

}  // namespace kam
