#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "kam/fourier_taylor.hpp"

namespace kam {

struct ActionBall {
  std::vector<double> center;
  double radius = 0.0;

  bool contains(std::span<const double> y, double margin = 0.0) const;
  /// Lebesgue measure of the ball in R^d.
  double measure() const;
};

/// K = E + w.y + Q(y, x) with Q = O(|y|^2) and T the inverse of <Q_yy(0, .)>.
struct KolmogorovNormalForm {
  double E = 0.0;
  std::vector<double> omega;
  FourierTaylor Q;
  Eigen::MatrixXd T;
  double width = 1.0;
  double radius = 1.0;

  int dim() const { return static_cast<int>(omega.size()); }
  /// E + w.y + Q as one series.
  FourierTaylor hamiltonian() const;
};

/// <Q_yy(0, .)>, read off the degree-2 averages of Q.
Eigen::MatrixXd average_hessian(const FourierTaylor& Q);

/// Builds the normal form and its twist inverse. Throws InvalidArgument if Q
/// has terms of degree <= 1 and SingularAverage if <Q_yy(0, .)> is not invertible.
KolmogorovNormalForm make_normal_form(double E, std::vector<double> omega, FourierTaylor Q, double width,
                                      double radius);

/// H(y, x; eps) = H0(y) + eps * sum_i eps^i P_i(y, x) on the action ball V.
struct NearlyIntegrable {
  FourierTaylor H0;
  std::vector<FourierTaylor> P;
  ActionBall V;
  double eps0 = 1.0;

  int dim() const { return H0.dim(); }
  /// sum_i eps^i P_i
  FourierTaylor perturbation(double eps) const;
};

struct LocalizedProblem {
  std::vector<double> anchor;
  KolmogorovNormalForm knf;
  /// eps-Taylor coefficients of the perturbation, shifted to the anchor.
  std::vector<FourierTaylor> P;

  int dim() const { return knf.dim(); }
  const std::vector<double>& omega() const { return knf.omega; }
  FourierTaylor perturbation(double eps) const;
  /// K + eps * perturbation(eps) in local coordinates.
  FourierTaylor hamiltonian(double eps) const;
};

std::vector<double> frequency_map(const FourierTaylor& H0, std::span<const double> y);
Eigen::MatrixXd action_hessian(const FourierTaylor& H0, std::span<const double> y);

/// Determinant of the Hessian of H0 at y. Throws DegenerateHessian when
/// |det| <= rel_threshold * (max |entry|)^d.
double check_nondegenerate(const FourierTaylor& H0, std::span<const double> y, double rel_threshold = 1e-8);

/// Taylor expansion of H0 at the anchor split as E + w.y + Q, with P shifted
/// to the anchor. All series get the given degree, cutoff and width.
/// Throws DomainOverflow if the ball of radius rho around the anchor leaves V.
LocalizedProblem localize(const NearlyIntegrable& problem, std::span<const double> anchor, double width, double rho,
                          int cutoff, int degree);

}  // namespace kam
