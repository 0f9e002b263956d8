#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "kam/angle_grid.hpp"
#include "kam/fourier_taylor.hpp"
#include "kam/half_spectrum.hpp"
#include "kam/hamiltonian.hpp"

namespace kam {

/// Small dense matrix, at most kMaxDim x kMaxDim.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// One near-identity symplectic change of variables. It is generated by
///   g(y', x) = y'.x + scale * (b.x + s(x) + beta(x).y'),
/// i.e. y = y' + scale*(b + grad s(x) + B(x) y') with B_ij = d_i beta_j and
/// x' = x + scale*beta(x). In the explicit form
///   y = y' + scale*(u(x') + U(x') y'),  x = x' + scale*alpha(x')
/// u, U, alpha are projections of b + grad s, B and -beta composed with the
/// inverse angle map; pointwise evaluation goes through the exact implicit form.
struct SymplecticStep {
  /// This step removes the perturbation of size eps^eps_power.
  long eps_power = 1;
  double scale = 0.0;
  std::vector<double> b;
  TrigPolynomial s;
  TrigVector beta;
  TrigVector u;
  TrigMatrix U;
  TrigVector alpha;
  double width_in = 0.0;
  double width_out = 0.0;
  double worst_divisor = 0.0;
  /// Condition number of <Q_yy(0, .)>.
  double condition = 1.0;

  int dim() const { return static_cast<int>(b.size()); }
  bool is_identity() const;

  /// x with x + scale*beta(x) = x_new, by Newton's method.
  Point inverse_angle(std::span<const double> x_new) const;
  /// (y, x) = step(y', x').
  void apply(std::span<const double> y_new, std::span<const double> x_new, double* y, double* x) const;
  /// Jacobian d(y, x)/d(y', x') as a 2d x 2d matrix, from exact derivatives.
  Eigen::MatrixXd jacobian(std::span<const double> y_new, std::span<const double> x_new) const;
};

/// Packed spectra of a step for repeated exact pointwise evaluation.
struct CompiledStep {
  explicit CompiledStep(const SymplecticStep& step, bool second_derivatives = true);

  /// Delta = x - x_new with x + scale*beta(x) = x_new; w receives the phases at x.
  Point solve_shift(std::span<const double> x_new, std::vector<Complex>& w) const;
  void apply(std::span<const double> y_new, std::span<const double> x_new, double* y, double* x) const;
  Eigen::MatrixXd jacobian(std::span<const double> y_new, std::span<const double> x_new) const;

  HalfSpectrum spec;
  int dim;
  double scale;
  bool identity;
  std::vector<double> b;
  std::vector<std::vector<Complex>> beta;                              // beta_j
  std::vector<std::vector<std::vector<Complex>>> dbeta;                // [i][j] = d_i beta_j
  std::vector<std::vector<Complex>> ds;                                // d_i s
  std::vector<std::vector<std::vector<Complex>>> dds;                  // [i][l] = d_i d_l s
  std::vector<std::vector<std::vector<std::vector<Complex>>>> ddbeta;  // [i][l][j] = d_i d_l beta_j
};

struct StepReport {
  int iteration = 0;
  double scale = 0.0;
  double norm_P_in = 0.0;
  double norm_P_out = 0.0;
  double width_in = 0.0;
  double width_loss = 0.0;
  double worst_divisor = 0.0;
  double condition = 1.0;
  double truncation_residual = 0.0;
  /// Largest angle-dependent coefficient of degree <= 1 left in the first-order term.
  double first_order_stray = 0.0;
};

struct StepOptions {
  /// Action radius used in the norms.
  double radius = 1.0;
  /// StripOverflow unless scale*|beta|_{xi - 2 delta/3} <= strip_fraction * delta.
  double strip_fraction = 1.0 / 3.0;
};

/// Solves the two cohomological equations and the twist equation for b.
/// Throws ResonantDivisor (also when a divisor |w.n| |n|_1^tau used by the
/// solves falls below gamma), SingularAverage or StripOverflow.
SymplecticStep build_step(const KolmogorovNormalForm& knf, const FourierTaylor& P, double scale, double gamma,
                          double tau, double delta, const StepOptions& options = {});

struct ApplyOptions {
  double radius = 1.0;
  /// Throw BudgetExceeded when the new perturbation is not smaller than the old one.
  bool throw_on_growth = true;
};

struct StepOutcome {
  KolmogorovNormalForm knf;
  /// New perturbation; the conjugated Hamiltonian is knf + scale^2 * P.
  FourierTaylor P;
  StepReport report;
  /// The order-scale term L1 of the conjugated Hamiltonian, before splitting.
  FourierTaylor first_order;
};

/// Conjugates K + scale*P by the step and splits the result into a new normal
/// form (same frequency) and a perturbation of order scale^2.
StepOutcome apply_step(const KolmogorovNormalForm& knf, const FourierTaylor& P, const SymplecticStep& step,
                       const ApplyOptions& options = {});

/// Q_yy(0, x) as a d x d matrix of trig polynomials.
TrigMatrix action_hessian_at_zero(const FourierTaylor& Q);

}  // namespace kam
