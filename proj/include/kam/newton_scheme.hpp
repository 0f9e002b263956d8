#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kam/error.hpp"
#include "kam/flow_oracle.hpp"
#include "kam/hamiltonian.hpp"
#include "kam/kolmogorov_step.hpp"

namespace kam {

/// Width bookkeeping: delta_j = delta_0 / 2^j with delta_0 = (xi - xi_star)/2,
/// so the total width spent stays below xi - xi_star.
struct Schedule {
  double xi = 0.5;
  double xi_star = 0.25;
  /// Action radius used in all norms.
  double rho = 0.5;
  int max_iterations = 8;
  /// Stop once |eps_j P_j| <= target_norm; negative means 1e-12 * |H|.
  double target_norm = -1.0;
  /// Passed to each step's strip check.
  double strip_fraction = 1.0 / 3.0;

  double delta0() const { return 0.5 * (xi - xi_star); }
  double delta(int j) const;
  /// Throws InvalidArgument for an inconsistent schedule.
  void validate() const;
};

/// Phi = phi_1 o phi_2 o ... o phi_J, evaluated exactly point by point.
class ComposedMap {
 public:
  ComposedMap() = default;
  /// Throws WidthChainViolation if a step starts wider than its predecessor ends.
  explicit ComposedMap(std::vector<SymplecticStep> steps);

  const std::vector<SymplecticStep>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }
  int dim() const { return steps_.empty() ? 0 : steps_.front().dim(); }

  void apply(std::span<const double> y, std::span<const double> x, double* Y, double* X) const;
  Eigen::MatrixXd jacobian(std::span<const double> y, std::span<const double> x) const;

  /// u*, alpha* of Phi(0, theta) = (eps u*(theta), theta + eps alpha*(theta)), projected to cutoff N.
  void restriction(double eps, int dim, int cutoff, TrigVector& u, TrigVector& alpha, double* tail = nullptr) const;

 private:
  std::vector<SymplecticStep> steps_;
  /// Innermost step first.
  std::vector<std::shared_ptr<const CompiledStep>> compiled_;
};

ComposedMap compose_maps(std::vector<SymplecticStep> steps);

struct TorusResult {
  std::vector<double> omega;
  double eps = 0.0;
  std::vector<double> anchor;
  /// zeta*(theta) = (eps u*(theta), theta + eps alpha*(theta))
  TrigVector u_star;
  TrigVector alpha_star;
  /// The torus as a graph y = graph(x).
  TrigVector graph;
  ComposedMap map;
  std::vector<StepReport> history;
  double final_norm = 0.0;
  double target_norm = 0.0;
  double invariance_error = 0.0;
  double invariance_tolerance = 1e-8;
  double min_jacobian_det = 1.0;
  double graph_consistency = 0.0;
  bool converged = false;
  bool verified = false;
  bool success = false;
  std::string status;

  int dim() const { return static_cast<int>(omega.size()); }
  /// zeta*(theta) from the projected u*, alpha*.
  void embed(std::span<const double> theta, double* y, double* x) const;
};

/// DivergenceDetected carrying the partial history.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<StepReport> history)
      : Error(ErrorKind::DivergenceDetected, what), history_(std::move(history)) {}
  const std::vector<StepReport>& history() const { return history_; }

 private:
  std::vector<StepReport> history_;
};

struct RunOptions {
  bool verify = true;
  VerifyOptions verification{};
  double invariance_tolerance = 1e-8;
  double flow_tolerance = 1e-12;
};

/// Iterates Kolmogorov steps with eps_j = eps^{2^j} until |eps_j P_j| <= target
/// or max_iterations; composes the steps and extracts the torus. The first step
/// must contract (BudgetExceeded otherwise); two consecutive growths raise
/// DivergenceError. Step errors are rethrown with the iteration index.
TorusResult run(const LocalizedProblem& localized, double eps, double gamma, double tau, const Schedule& schedule,
                const RunOptions& options = {});

/// Flow check of a torus against the local Hamiltonian at eps.
Verification verify(const LocalizedProblem& localized, const TorusResult& torus, const VerifyOptions& options,
                    double flow_tolerance = 1e-12);

struct ProbeOptions {
  double eps_max = 1.0;
  double eps_min = 1e-12;
  /// Bisection stops when hi/lo <= 1 + rel_tol.
  double rel_tol = 0.05;
  RunOptions run{};
};

struct ProbeResult {
  double eps_hat = 0.0;
  int runs = 0;
  /// eps_hat equals eps_max (no failure found).
  bool unconstrained = false;
};

/// Largest eps in [eps_min, eps_max] at which run() succeeds, by bisection in log eps.
ProbeResult epsilon_threshold_probe(const LocalizedProblem& localized, double gamma, double tau,
                                    const Schedule& schedule, const ProbeOptions& options = {});

}  // namespace kam
