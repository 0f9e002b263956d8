#pragma once

#include <array>
#include <complex>
#include <map>
#include <span>
#include <vector>

#include "kam/multi_index.hpp"

namespace kam {

using Complex = std::complex<double>;

/// Truncated Fourier series f(x) = sum_n f_n e^{i n.x} on the flat torus T^d,
/// with |n|_inf <= cutoff. Both n and -n are stored; real-valued functions
/// satisfy f_{-n} = conj(f_n), which every operation here preserves.
class TrigPolynomial {
 public:
  using Map = std::map<Index, Complex>;

  TrigPolynomial() = default;
  TrigPolynomial(int dim, int cutoff);

  static TrigPolynomial constant(int dim, int cutoff, double value);
  /// amplitude * cos(n.x)
  static TrigPolynomial cosine(int dim, int cutoff, const Index& n, double amplitude = 1.0);
  /// amplitude * sin(n.x)
  static TrigPolynomial sine(int dim, int cutoff, const Index& n, double amplitude = 1.0);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  const Map& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  Complex coeff(const Index& n) const;
  Complex mean() const { return coeff(zero_index()); }

  /// Stores a single coefficient; the caller is responsible for the conjugate partner.
  void set(const Index& n, Complex c);
  void add(const Index& n, Complex c);
  /// Sets f_n and f_{-n} = conj(c) together.
  void set_real_pair(const Index& n, Complex c);

  TrigPolynomial& operator+=(const TrigPolynomial& g);
  TrigPolynomial& operator-=(const TrigPolynomial& g);
  TrigPolynomial& operator*=(double s);

  Complex evaluate_complex(std::span<const double> x) const;
  /// Real part of the series at x (the value, for real-valued f).
  double evaluate(std::span<const double> x) const;

  TrigPolynomial without_mean() const;
  TrigPolynomial with_cutoff(int cutoff) const;
  /// Removes coefficients with |f_n| <= threshold.
  TrigPolynomial pruned(double threshold) const;

  double max_abs() const;
  /// max_n |f_{-n} - conj(f_n)|
  double reality_defect() const;
  /// sum_n |f_n| e^{width |n|_1}
  double weighted_l1(double width) const;

 private:
  void check_dim(const TrigPolynomial& g) const;

  int dim_ = 0;
  int cutoff_ = 0;
  Map coeffs_;
};

using TrigVector = std::vector<TrigPolynomial>;
using TrigMatrix = std::vector<TrigVector>;

TrigPolynomial operator+(TrigPolynomial f, const TrigPolynomial& g);
TrigPolynomial operator-(TrigPolynomial f, const TrigPolynomial& g);
TrigPolynomial operator*(double s, TrigPolynomial f);

/// Truncated product. Products with |n|_inf beyond the larger cutoff are
/// discarded; their mass sum |f_n||g_m| e^{width |n+m|_1} is added to *residual if given.
TrigPolynomial multiply(const TrigPolynomial& f, const TrigPolynomial& g, double* residual = nullptr,
                        double width = 0.0);

TrigPolynomial derivative(const TrigPolynomial& f, int axis);
/// D_w f = sum_j w_j d_{x_j} f
TrigPolynomial directional_derivative(const TrigPolynomial& f, std::span<const double> omega);

struct TrigCohomology {
  TrigPolynomial solution;
  /// min over stored n != 0 of |w.n| |n|_1^tau (+inf when there is no such n)
  double worst_divisor;
  Index worst_mode;
};

/// Solves D_w F = f for zero-average f: F_n = f_n / (i w.n), F_0 = 0.
TrigCohomology solve_cohomological(const TrigPolynomial& f, std::span<const double> omega, double tau);

/// Table of e^{i k x_j} for |k| <= cutoff at one point, for fast repeated evaluation.
class Phases {
 public:
  Phases(std::span<const double> x, int dim, int cutoff);
  Complex operator()(const Index& n) const {
    Complex z = table_[0][n[0] + cutoff_];
    for (int j = 1; j < dim_; ++j) z *= table_[j][n[j] + cutoff_];
    return z;
  }
  /// Real part of sum_n f_n e^{i n.x}.
  double evaluate(const TrigPolynomial& f) const;

 private:
  int dim_;
  int cutoff_;
  std::array<std::vector<Complex>, kMaxDim> table_;
};

TrigVector gradient(const TrigPolynomial& f);
TrigVector zero_vector(int dim, int cutoff);
double max_abs(const TrigVector& v);

}  // namespace kam
