#pragma once

#include <limits>
#include <vector>

#include "kam/hamiltonian.hpp"
#include "kam/newton_scheme.hpp"

namespace kam {

/// Order k of the torus embedding: u* = sum eps^{k-1} u_k, alpha* likewise.
struct LindstedtOrder {
  TrigVector u;
  TrigVector alpha;
};

/// Formal eps-series of the torus zeta(theta) = (eps u, theta + eps alpha).
/// The phase gauge is fixed by <alpha_k> = 0 at every order.
struct LindstedtSeries {
  std::vector<double> omega;
  std::vector<LindstedtOrder> orders;
  int cutoff = 0;
  double worst_divisor = std::numeric_limits<double>::infinity();
  /// Root-test estimate of the radius in eps (NaN with fewer than 4 orders).
  double radius_estimate = std::numeric_limits<double>::quiet_NaN();

  int dim() const { return static_cast<int>(omega.size()); }
  int max_order() const { return static_cast<int>(orders.size()); }
};

/// Solves the invariance equation order by order. Throws ResonantDivisor when
/// w fails the Diophantine check at the series cutoff, and SecularTerm when a
/// right side that must average to zero does not.
LindstedtSeries expand(const LocalizedProblem& localized, double gamma, double tau, int max_order);

/// sup over the angle grid of |d/dt zeta - X_H(zeta)| for the partial sum up
/// to order `order` (all orders when negative), at the given eps.
double residual(const LindstedtSeries& series, const LocalizedProblem& localized, double eps, int order = -1);

/// eps-Taylor coefficients g_1..g_K of the graph y = g(x) = sum eps^k g_k(x).
std::vector<TrigVector> graph_orders(const LindstedtSeries& series);

/// sup_x |graph(x) - sum_{k<=K} eps^k g_k(x)| for K = 1..max_order, against a
/// Newton torus at its eps. Throws GridMismatch on differing frequency or cutoff.
std::vector<double> compare_to_newton(const LindstedtSeries& series, const TorusResult& torus);

struct OrderFit {
  /// Relative sup deviation of the fitted eps^k coefficient from g_k, k = 1..
  std::vector<double> relative_deviation;
  std::vector<double> eps;
};

/// Interpolates the Newton graphs at several eps by a polynomial in eps without
/// constant term and compares its coefficients to the Lindstedt graph orders.
OrderFit fit_newton_orders(const LindstedtSeries& series, const std::vector<TorusResult>& tori, int max_order);

/// Newton tori at eps * 2^{-i}, i = 0..count-1.
std::vector<TorusResult> newton_family(const LocalizedProblem& localized, double eps, int count, double gamma,
                                       double tau, const Schedule& schedule, const RunOptions& options = {});

/// sum_j |u_kj|_width + |alpha_kj|_width for each order.
std::vector<double> order_norms(const LindstedtSeries& series, double width);

/// 1/limsup |order_k|^{1/k} from a least-squares fit of log |order_k| against k.
/// +inf when all orders vanish. Throws InsufficientOrders for fewer than 4 orders.
double radius_estimate(const std::vector<double>& norms);
double radius_estimate(const LindstedtSeries& series, double width = 0.0);

}  // namespace kam
