#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kam/angle_grid.hpp"
#include "kam/fourier_taylor.hpp"

namespace kam {

/// Hamiltonian vector field y' = -H_x, x' = H_y integrated by an adaptive
/// Runge-Kutta-Fehlberg 7(8) pair. Only pointwise values of H are used.
struct FlowSpec {
  FourierTaylor H;
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double max_time = 1e4;
  /// Step-size ceiling. On nearly linear flows the embedded error estimate
  /// vanishes and the controller would otherwise take steps of order one.
  double max_step = 0.1;
  /// DomainExit once |y| exceeds this (actions are local coordinates).
  std::optional<double> action_radius;
  long max_steps = 10'000'000;
};

struct FlowState {
  std::vector<double> y;
  std::vector<double> x;          ///< unwrapped angles
  std::vector<double> x_wrapped;  ///< angles in [0, 2 pi)
  double time = 0.0;
  long steps = 0;
  /// Sum over accepted steps of the tolerance scale, a crude global error bound.
  double error_estimate = 0.0;
};

double hamiltonian_value(const FlowSpec& spec, std::span<const double> y, std::span<const double> x);

/// Throws DomainExit or ToleranceFailure.
FlowState integrate(const FlowSpec& spec, std::span<const double> y0, std::span<const double> x0, double t);

/// States at each of the given nondecreasing times (one trajectory).
std::vector<FlowState> integrate_times(const FlowSpec& spec, std::span<const double> y0, std::span<const double> x0,
                                       std::span<const double> times);

/// theta -> (y, x) on the torus to certify.
using Embedding = std::function<void(std::span<const double> theta, double* y, double* x)>;

struct VerifyOptions {
  double periods = 10.0;
  int time_samples = 20;
  int theta_points = 32;
};

struct Verification {
  double invariance_error = 0.0;
  double energy_drift = 0.0;
  long steps = 0;
};

/// max over theta and t of |Phi^t(zeta(theta)) - zeta(theta + w t)|, angles
/// compared modulo 2 pi. Times are uniform on [0, periods * 2 pi / |w|].
Verification verify_torus(const FlowSpec& spec, const Embedding& zeta, std::span<const double> omega,
                          const VerifyOptions& options = {});

/// points uniform nodes for d = 1; a rank-1 lattice with that many nodes for d >= 2.
std::vector<Point> theta_grid(int dim, int points);

/// Euclidean distance with each angle difference reduced to [-pi, pi].
double phase_space_distance(std::span<const double> y1, std::span<const double> x1, std::span<const double> y2,
                            std::span<const double> x2);

}  // namespace kam
