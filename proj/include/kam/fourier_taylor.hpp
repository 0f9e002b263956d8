#pragma once

#include <map>
#include <span>

#include "kam/trig_polynomial.hpp"

namespace kam {

/// f(y, x) = sum_a y^a f_a(x): a polynomial of total degree <= D in the
/// actions whose coefficients are trig polynomials in the angles.
class FourierTaylor {
 public:
  using Terms = std::map<Index, TrigPolynomial>;

  FourierTaylor() = default;
  FourierTaylor(int dim, int degree, int cutoff, double width = 1.0);

  /// The angle-only function f(x), as the a = 0 term.
  static FourierTaylor from_trig(const TrigPolynomial& f, int degree, double width = 1.0);
  static FourierTaylor monomial(int dim, int degree, int cutoff, const Index& a, double c);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int cutoff() const { return cutoff_; }
  double width() const { return width_; }
  void set_width(double w) { width_ = w; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Coefficient of y^a (a zero polynomial when absent).
  TrigPolynomial term(const Index& a) const;
  void set_term(const Index& a, TrigPolynomial f);
  void add_term(const Index& a, const TrigPolynomial& f);

  double evaluate(std::span<const double> y, std::span<const double> x) const;

  FourierTaylor& operator+=(const FourierTaylor& g);
  FourierTaylor& operator-=(const FourierTaylor& g);
  FourierTaylor& operator*=(double s);

  /// Terms with lo <= |a|_1 <= hi.
  FourierTaylor degree_part(int lo, int hi) const;
  FourierTaylor with_cutoff(int cutoff) const;
  /// Same function with new degree, cutoff and width; terms beyond them are dropped.
  FourierTaylor reshaped(int degree, int cutoff, double width) const;
  FourierTaylor pruned(double threshold) const;

  /// Largest |n|_inf over stored coefficients.
  int max_mode() const;
  double reality_defect() const;
  /// Largest coefficient modulus over all a and n.
  double max_abs() const;

 private:
  void check_dim(const FourierTaylor& g) const;

  int dim_ = 0;
  int degree_ = 0;
  int cutoff_ = 0;
  double width_ = 1.0;
  Terms terms_;
};

FourierTaylor operator+(FourierTaylor f, const FourierTaylor& g);
FourierTaylor operator-(FourierTaylor f, const FourierTaylor& g);
FourierTaylor operator*(double s, FourierTaylor f);

FourierTaylor add(const FourierTaylor& f, const FourierTaylor& g);

/// Truncated product. Terms above action degree max(D_f, D_g) or Fourier cutoff
/// max(N_f, N_g) are dropped and their weighted mass, at the width of f and
/// action radius rho, is added to *residual.
FourierTaylor mul(const FourierTaylor& f, const FourierTaylor& g, double* residual = nullptr, double rho = 1.0);

FourierTaylor partial_action(const FourierTaylor& f, int axis);
FourierTaylor partial_angle(const FourierTaylor& f, int axis);
FourierTaylor average(const FourierTaylor& f);

struct Cohomology {
  FourierTaylor solution;
  /// min over stored n != 0 of |w.n| |n|_1^tau
  double worst_divisor;
  Index worst_mode;
  /// worst_divisor >= gamma
  bool meets_gamma;
};

/// Solves D_w F = f term by term for zero-average f.
Cohomology solve_cohomological(const FourierTaylor& f, std::span<const double> omega, double gamma, double tau);

struct AnalyticNorm {
  double value;
  double width;
  double radius;
};

/// sum_a rho^{|a|_1} sum_n |f_{a,n}| e^{xi |n|_1}
AnalyticNorm norm(const FourierTaylor& f, double xi, double rho);

struct AngleComposition {
  FourierTaylor result;
  double aliasing_residual;
};

/// f(y, x + eps*alpha(x)) by sampling on a (3N+1)^d grid and projecting back
/// to cutoff N. Throws StripOverflow when eps * max_j |alpha_j|_{xi-delta} > delta,
/// xi being the width of f. A non-positive delta defaults to xi/2.
AngleComposition compose_angle_map(const FourierTaylor& f, const TrigVector& alpha, double eps,
                                   double delta = 0.0);

/// f(y0 + y, x), exact Taylor shift in the actions.
FourierTaylor shift_action(const FourierTaylor& f, std::span<const double> y0);

/// Restriction y = 0 (the a = 0 term).
TrigPolynomial at_zero_action(const FourierTaylor& f);

}  // namespace kam
