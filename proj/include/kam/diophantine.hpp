#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kam/hamiltonian.hpp"
#include "kam/multi_index.hpp"

namespace kam {

/// |w.n| >= gamma / |n|_1^tau for 0 < |n|_1 <= cutoff. All lattice norms are 1-norms,
/// and "Diophantine" always means "Diophantine up to the cutoff".
struct DiophantineParams {
  double gamma = 0.0;
  double tau = 1.0;
  int cutoff = 1000;

  /// Throws InvalidArgument unless gamma >= 0, tau >= d - 1 and cutoff >= 1.
  void validate(int dim) const;
};

/// Default cutoff: 1000 for d <= 2, 100 for d = 3.
int default_diophantine_cutoff(int dim);

struct DiophantineCheck {
  bool pass = false;
  /// min over 0 < |n|_1 <= cutoff of |w.n| |n|_1^tau
  double margin = 0.0;
  /// Minimizing mode, first nonzero component positive.
  Index witness{};
};

DiophantineCheck check(std::span<const double> omega, const DiophantineParams& params);

/// Largest gamma for which check passes at this cutoff. Throws ExactResonance.
double max_gamma(std::span<const double> omega, double tau, int cutoff);

/// Axis-aligned box bound of a frequency domain.
struct FrequencyDomain {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double diameter() const;
  double measure() const;
};

/// Bounding box of w0 over a grid of the ball (points per axis).
FrequencyDomain frequency_domain(const FourierTaylor& H0, const ActionBall& ball, int points = 21);

/// Grid is stratified: one seeded uniform point in each cell of a regular grid.
enum class SamplingMethod { Grid, MonteCarlo };

struct ComplementEstimate {
  double gamma = 0.0;
  /// Fraction of samples failing the check.
  double fraction = 0.0;
  /// fraction * meas(Omega)
  double estimate = 0.0;
  /// Binomial standard error, scaled like the estimate.
  double stderr_ = 0.0;
  /// c * gamma from the slab series, head up to the cutoff plus a tail bound.
  double analytic_bound = 0.0;
  long samples = 0;
};

/// The slab-series constant c with meas(Omega \ Omega_gamma) <= c gamma.
double analytic_constant(const FrequencyDomain& domain, double tau, int cutoff);

/// Throws InvalidArgument for fewer than 1000 samples.
ComplementEstimate measure_complement(const FrequencyDomain& domain, const DiophantineParams& params,
                                      SamplingMethod method, long samples, std::uint64_t seed = 1);

struct GoodSet {
  std::vector<std::vector<double>> samples;
  std::vector<bool> good;
  double excluded_fraction = 0.0;
  double excluded_measure = 0.0;
  /// Bounds of |det D w0| over the samples; measure in B transfers from frequency space through these.
  double min_jacobian = 0.0;
  double max_jacobian = 0.0;

  std::size_t good_count() const;
};

/// Grid samples of the ball (points per axis over the bounding cube, cell
/// midpoints, or one seeded uniform point per cell with a jitter seed) with the
/// check result of their frequency. Throws DegenerateHessian.
GoodSet pullback_good_set(const FourierTaylor& H0, const ActionBall& ball, const DiophantineParams& params,
                          int points_per_axis, std::optional<std::uint64_t> jitter_seed = std::nullopt);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_draw(std::uint64_t bits);

}  // namespace kam
