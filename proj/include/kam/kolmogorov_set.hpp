#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kam/diophantine.hpp"
#include "kam/hamiltonian.hpp"
#include "kam/newton_scheme.hpp"

namespace kam {

struct PipelineConfig {
  /// gamma = eps^q
  double q = 0.2;
  double tau = 1.5;
  /// Diophantine cutoff; nonpositive means the default for the dimension.
  int dio_cutoff = 0;
  /// Radius of the covering balls; cells of side 2r/sqrt(d) tile the inner region.
  double ball_radius = 0.1;
  /// Total anchor samples over the inner region (rounded to a per-cell grid).
  int anchors = 200;
  /// Sub-grid points per axis in each cell; positive values override `anchors`.
  int anchors_per_axis = 0;
  int cutoff = 8;
  int degree = 2;
  Schedule schedule{};
  /// Flow checks on this many randomly chosen successful anchors.
  int flow_checks = 10;
  VerifyOptions verification{};
  int workers = 1;
  std::uint64_t seed = 1;
};

enum class AnchorStatus { Excluded, Failed, Succeeded, Unanalyzed };

const char* to_string(AnchorStatus status);

struct AnchorSummary {
  std::vector<double> anchor;
  std::vector<double> omega;
  AnchorStatus status = AnchorStatus::Unanalyzed;
  double dio_margin = 0.0;
  std::string error;
  int iterations = 0;
  double final_norm = 0.0;
  double min_jacobian_det = 0.0;
  /// Set only for anchors that were flow-checked (negative otherwise).
  double invariance_error = -1.0;
};

/// (anchor, w, u*, alpha*) of successful runs; all share eps and cutoff.
struct KolmogorovMapSamples {
  double eps = 0.0;
  struct Entry {
    std::vector<double> anchor;
    std::vector<double> omega;
    TrigVector u_star;
    TrigVector alpha_star;
  };
  std::vector<Entry> entries;
};

struct KolmogorovSetReport {
  double eps = 0.0;
  double gamma = 0.0;
  double q = 0.0;
  long attempted = 0;
  long succeeded = 0;
  long excluded = 0;
  long failed = 0;
  long unanalyzed = 0;
  /// Measure of the sampled inner region of V.
  double sampled_measure = 0.0;
  double excluded_measure = 0.0;
  double failed_measure = 0.0;
  double unanalyzed_measure = 0.0;
  double lipschitz = 1.0;
  double lipschitz_benchmark = 2.0;
  /// (excluded + failed + unanalyzed) measure times lipschitz^d, with its binomial stderr.
  double complement = 0.0;
  double complement_stderr = 0.0;
  /// Largest invariance error among flow-checked anchors, and whether each met its tolerance.
  double worst_flow_error = 0.0;
  bool flow_consistent = true;
  std::vector<AnchorSummary> anchors;
};

/// Covers the inner region of V (points at distance >= rho from its boundary)
/// with cells, filters Diophantine anchors with gamma = eps^q, runs the Newton
/// scheme at each good anchor in parallel, and reports the measure accounting.
/// Results do not depend on the worker count.
KolmogorovSetReport run_pipeline(const NearlyIntegrable& problem, double eps, const PipelineConfig& config);

/// max over sample pairs and a theta grid of |psi(y, t) - psi(y', t)| / |y - y'| with
/// psi(y, t) = (y + eps u*(t; y), t + eps alpha*(t; y)). Throws InsufficientSamples
/// with fewer than 2 entries and GridMismatch when cutoffs differ.
double lipschitz_estimate(const KolmogorovMapSamples& samples, int theta_points = 32);

struct LemmaCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// Synthetic battery for the Lipschitz lemmas: the gamma^-2 scaling of the
/// omega-derivative of the inverse D_w, the matrix-inverse bound lambda m^2, and
/// the inverse-shift bound lambda / (1 - |eps| |a_x|).
std::vector<LemmaCheck> lipschitz_lemma_checks();

/// Runs f(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f);

}  // namespace kam
