#include "kam/hamiltonian.hpp"

#include <cmath>
#include <numbers>

#include "kam/error.hpp"

namespace kam {

namespace {

double power(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Value of the mean (angle-independent part) of f at y, differentiated by
// the multi-index m in the actions.
double action_derivative(const FourierTaylor& f, std::span<const double> y, const Index& m) {
  double sum = 0.0;
  for (const auto& [a, fa] : f.terms()) {
    double factor = fa.mean().real();
    if (factor == 0.0) continue;
    for (int j = 0; j < f.dim() && factor != 0.0; ++j) {
      if (a[j] < m[j]) {
        factor = 0.0;
        break;
      }
      for (int k = 0; k < m[j]; ++k) factor *= a[j] - k;
      factor *= power(y[j], a[j] - m[j]);
    }
    sum += factor;
  }
  return sum;
}

void require_angle_free(const FourierTaylor& H0) {
  for (const auto& [a, fa] : H0.terms())
    for (const auto& [n, c] : fa.coeffs())
      require(is_zero(n), ErrorKind::InvalidArgument, "integrable part depends on the angles");
}

}  // namespace

bool ActionBall::contains(std::span<const double> y, double margin) const {
  double r2 = 0.0;
  for (std::size_t j = 0; j < center.size(); ++j) r2 += (y[j] - center[j]) * (y[j] - center[j]);
  return std::sqrt(r2) + margin <= radius * (1.0 + 1e-12);
}

double ActionBall::measure() const {
  const double d = static_cast<double>(center.size());
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(radius, d);
}

FourierTaylor KolmogorovNormalForm::hamiltonian() const {
  FourierTaylor H = Q;
  H.add_term(zero_index(), TrigPolynomial::constant(dim(), Q.cutoff(), E));
  for (int j = 0; j < dim(); ++j) H.add_term(unit_index(j), TrigPolynomial::constant(dim(), Q.cutoff(), omega[j]));
  return H;
}

Eigen::MatrixXd average_hessian(const FourierTaylor& Q) {
  const int d = Q.dim();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  for (const auto& a : monomials_of_degree(d, 2)) {
    const double c = Q.term(a).mean().real();
    int i = -1, j = -1;
    for (int k = 0; k < d; ++k) {
      if (a[k] == 2) i = j = k;
      if (a[k] == 1) (i < 0 ? i : j) = k;
    }
    if (i == j) {
      A(i, i) = 2.0 * c;
    } else {
      A(i, j) = A(j, i) = c;
    }
  }
  return A;
}

KolmogorovNormalForm make_normal_form(double E, std::vector<double> omega, FourierTaylor Q, double width,
                                      double radius) {
  require(static_cast<int>(omega.size()) == Q.dim(), ErrorKind::DimensionMismatch, "frequency vs Q dimension");
  for (const auto& [a, fa] : Q.terms())
    require(l1(a) >= 2, ErrorKind::InvalidArgument, "Q has terms of action degree <= 1");
  const Eigen::MatrixXd A = average_hessian(Q);
  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  const double det = A.determinant();
  if (!(std::abs(det) > 1e-12 * std::pow(scale, Q.dim())))
    fail(ErrorKind::SingularAverage, "averaged Hessian determinant " + std::to_string(det));
  KolmogorovNormalForm knf;
  knf.E = E;
  knf.omega = std::move(omega);
  knf.Q = std::move(Q);
  knf.T = A.inverse();
  knf.width = width;
  knf.radius = radius;
  return knf;
}

FourierTaylor NearlyIntegrable::perturbation(double eps) const {
  FourierTaylor sum;
  double w = 1.0;
  for (const auto& Pi : P) {
    sum += w * Pi;
    w *= eps;
  }
  if (sum.dim() == 0) sum = FourierTaylor(dim(), H0.degree(), 0, H0.width());
  return sum;
}

FourierTaylor LocalizedProblem::perturbation(double eps) const {
  FourierTaylor sum(dim(), knf.Q.degree(), knf.Q.cutoff(), knf.width);
  double w = 1.0;
  for (const auto& Pi : P) {
    sum += w * Pi;
    w *= eps;
  }
  return sum;
}

FourierTaylor LocalizedProblem::hamiltonian(double eps) const { return knf.hamiltonian() + eps * perturbation(eps); }

std::vector<double> frequency_map(const FourierTaylor& H0, std::span<const double> y) {
  require_angle_free(H0);
  std::vector<double> w(H0.dim());
  for (int j = 0; j < H0.dim(); ++j) w[j] = action_derivative(H0, y, unit_index(j));
  return w;
}

Eigen::MatrixXd action_hessian(const FourierTaylor& H0, std::span<const double> y) {
  require_angle_free(H0);
  const int d = H0.dim();
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = action_derivative(H0, y, unit_index(i) + unit_index(j));
  return A;
}

double check_nondegenerate(const FourierTaylor& H0, std::span<const double> y, double rel_threshold) {
  const Eigen::MatrixXd A = action_hessian(H0, y);
  const double det = A.determinant();
  const double scale = A.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > rel_threshold * std::pow(scale, H0.dim())))
    fail(ErrorKind::DegenerateHessian, "Hessian determinant " + std::to_string(det));
  return det;
}

LocalizedProblem localize(const NearlyIntegrable& problem, std::span<const double> anchor, double width, double rho,
                          int cutoff, int degree) {
  const int d = problem.dim();
  require(static_cast<int>(anchor.size()) == d, ErrorKind::DimensionMismatch, "anchor dimension");
  if (!problem.V.contains(anchor, rho)) fail(ErrorKind::DomainOverflow, "action ball around anchor leaves V");
  check_nondegenerate(problem.H0, anchor);
  require(problem.H0.degree() <= degree, ErrorKind::InvalidArgument, "action degree below that of H0");

  const FourierTaylor shifted = shift_action(problem.H0, anchor).reshaped(degree, cutoff, width);
  LocalizedProblem out;
  out.anchor.assign(anchor.begin(), anchor.end());
  const double E = shifted.term(zero_index()).mean().real();
  std::vector<double> omega(d);
  for (int j = 0; j < d; ++j) omega[j] = shifted.term(unit_index(j)).mean().real();
  out.knf = make_normal_form(E, std::move(omega), shifted.degree_part(2, degree), width, rho);
  for (const auto& Pi : problem.P) {
    require(Pi.degree() <= degree, ErrorKind::InvalidArgument, "perturbation degree exceeds action degree");
    out.P.push_back(shift_action(Pi, anchor).reshaped(degree, cutoff, width));
  }
  return out;
}

}  // namespace kam
