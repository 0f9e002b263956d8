#include "kam/half_spectrum.hpp"

#include "kam/error.hpp"

namespace kam {

HalfSpectrum::HalfSpectrum(int dim, int cutoff) : dim_(dim), cutoff_(cutoff) {
  for (const auto& n : box_indices(dim, cutoff))
    if (is_canonical(n)) modes_.push_back(n);
}

std::vector<Complex> HalfSpectrum::pack(const TrigPolynomial& f) const {
  require(f.dim() == dim_ && f.cutoff() <= cutoff_, ErrorKind::GridMismatch, "pack: spectrum too small");
  std::vector<Complex> out(modes_.size());
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const Complex c = f.coeff(modes_[k]);
    out[k] = is_zero(modes_[k]) ? Complex(c.real(), 0.0) : 2.0 * c;
  }
  return out;
}

std::vector<Complex> HalfSpectrum::pack_derivative(const TrigPolynomial& f, int axis) const {
  auto out = pack(f);
  for (std::size_t k = 0; k < modes_.size(); ++k) out[k] *= Complex(0.0, modes_[k][axis]);
  return out;
}

void HalfSpectrum::phases(std::span<const double> x, std::vector<Complex>& w) const {
  Phases table(x, dim_, cutoff_);
  w.resize(modes_.size());
  for (std::size_t k = 0; k < modes_.size(); ++k) w[k] = table(modes_[k]);
}

}  // namespace kam
