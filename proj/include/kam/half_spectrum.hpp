#pragma once

#include <span>
#include <vector>

#include "kam/angle_grid.hpp"
#include "kam/trig_polynomial.hpp"

namespace kam {

/// Canonical half of the Fourier box |n|_inf <= cutoff. A real trig polynomial
/// is packed as one complex number per canonical mode (doubled for n != 0), so
/// that f(x) = Re sum_k packed_k * w_k with w_k = e^{i n_k.x}, and the same
/// holds for any weight with w_{-n} = conj(w_n).
class HalfSpectrum {
 public:
  HalfSpectrum(int dim, int cutoff);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<Index>& modes() const { return modes_; }

  std::vector<Complex> pack(const TrigPolynomial& f) const;
  /// Packs d_axis f.
  std::vector<Complex> pack_derivative(const TrigPolynomial& f, int axis) const;

  /// w_k = e^{i n_k . x}
  void phases(std::span<const double> x, std::vector<Complex>& w) const;

  static double apply(std::span<const Complex> packed, std::span<const Complex> w) {
    double s = 0.0;
    for (std::size_t k = 0; k < packed.size(); ++k) s += packed[k].real() * w[k].real() - packed[k].imag() * w[k].imag();
    return s;
  }

 private:
  int dim_;
  int cutoff_;
  std::vector<Index> modes_;
};

}  // namespace kam
