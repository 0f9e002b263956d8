#include "kam/diophantine.hpp"

#include <cfloat>
#include <cmath>
#include <numbers>
#include <random>

#include "kam/error.hpp"

namespace kam {

namespace {

// Scans the modes 0 < |n|_1 <= cutoff that can have |w.n| < |w_p|, p the
// largest component: for fixed other components only the two integers nearest
// to the real solution of w.n = 0 qualify, and e_p itself has |w.n| = |w_p|.
// visit(n, |w.n|, |n|_1) returns false to stop.
template <class Visit>
void scan_near_resonances(std::span<const double> omega, int cutoff, Visit&& visit) {
  const int d = static_cast<int>(omega.size());
  int p = 0;
  for (int j = 1; j < d; ++j)
    if (std::abs(omega[j]) > std::abs(omega[p])) p = j;
  const double wp = omega[p];
  int others[kMaxDim] = {};
  for (int j = 0, k = 0; j < d; ++j)
    if (j != p) others[k++] = j;

  if (!visit(unit_index(p), std::abs(wp), 1)) return;

  auto candidates = [&](const Index& n, int used) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += omega[j] * n[j];
    const double t = -s / wp;
    const double lo = std::floor(t), hi = std::ceil(t);
    for (const double c : {lo, hi}) {
      const int np = static_cast<int>(c);
      const int total = used + std::abs(np);
      if (total > cutoff) continue;
      Index m = n;
      m[p] = np;
      if (!visit(m, std::abs(s + wp * np), total)) return false;
      if (hi == lo) break;
    }
    return true;
  };

  if (d == 2) {
    for (int a = 1; a <= cutoff; ++a) {
      Index n{};
      n[others[0]] = a;
      if (!candidates(n, a)) return;
    }
  } else if (d == 3) {
    for (int a = 0; a <= cutoff; ++a)
      for (int b = -(cutoff - a); b <= cutoff - a; ++b) {
        if (a == 0 && b <= 0) continue;
        Index n{};
        n[others[0]] = a;
        n[others[1]] = b;
        if (!candidates(n, a + std::abs(b))) return;
      }
  }
}

Index canonical(Index n) { return is_canonical(n) ? n : negate(n); }

std::vector<double> powers(double tau, int cutoff) {
  std::vector<double> out(cutoff + 1, 0.0);
  for (int k = 1; k <= cutoff; ++k) out[k] = std::pow(static_cast<double>(k), tau);
  return out;
}

bool passes(std::span<const double> omega, double gamma, int cutoff, const std::vector<double>& kpow) {
  if (gamma <= 0.0) return true;
  bool ok = true;
  scan_near_resonances(omega, cutoff, [&](const Index&, double value, int k) {
    if (value * kpow[k] < gamma) ok = false;
    return ok;
  });
  return ok;
}

// Volume of the unit ball in R^m.
double unit_ball_volume(int m) { return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0); }

}  // namespace

void DiophantineParams::validate(int dim) const {
  require(gamma >= 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be finite and >= 0");
  require(tau >= dim - 1, ErrorKind::InvalidArgument, "tau must be at least d - 1");
  require(cutoff >= 1, ErrorKind::InvalidArgument, "Diophantine cutoff must be positive");
}

int default_diophantine_cutoff(int dim) { return dim >= 3 ? 100 : 1000; }

double unit_draw(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

DiophantineCheck check(std::span<const double> omega, const DiophantineParams& params) {
  const int d = static_cast<int>(omega.size());
  require(d >= 1 && d <= kMaxDim, ErrorKind::DimensionMismatch, "frequency dimension must be 1..3");
  double size = 0.0;
  for (double w : omega) size = std::max(size, std::abs(w));
  require(size > 0.0, ErrorKind::InvalidArgument, "zero frequency vector");
  require(params.cutoff >= 1, ErrorKind::InvalidArgument, "Diophantine cutoff must be positive");
  const auto kpow = powers(params.tau, params.cutoff);
  DiophantineCheck out;
  out.margin = std::numeric_limits<double>::infinity();
  scan_near_resonances(omega, params.cutoff, [&](const Index& n, double value, int k) {
    const double m = value * kpow[k];
    if (m < out.margin) {
      out.margin = m;
      out.witness = canonical(n);
    }
    return true;
  });
  out.pass = out.margin >= params.gamma;
  return out;
}

double max_gamma(std::span<const double> omega, double tau, int cutoff) {
  const DiophantineCheck c = check(omega, {0.0, tau, cutoff});
  double scale = 0.0;
  for (std::size_t j = 0; j < omega.size(); ++j) scale += std::abs(omega[j] * c.witness[j]);
  if (c.margin <= 4.0 * DBL_EPSILON * scale * std::pow(l1(c.witness), tau)) {
    std::string w;
    for (std::size_t j = 0; j < omega.size(); ++j) w += (j ? "," : "") + std::to_string(c.witness[j]);
    fail(ErrorKind::ExactResonance, "w.n = 0 at n = (" + w + ")");
  }
  return c.margin;
}

double FrequencyDomain::diameter() const {
  double s = 0.0;
  for (int j = 0; j < dim(); ++j) s += (hi[j] - lo[j]) * (hi[j] - lo[j]);
  return std::sqrt(s);
}

double FrequencyDomain::measure() const {
  double m = 1.0;
  for (int j = 0; j < dim(); ++j) m *= hi[j] - lo[j];
  return m;
}

FrequencyDomain frequency_domain(const FourierTaylor& H0, const ActionBall& ball, int points) {
  const int d = H0.dim();
  require(static_cast<int>(ball.center.size()) == d, ErrorKind::DimensionMismatch, "ball vs H0 dimension");
  require(points >= 2, ErrorKind::InvalidArgument, "need at least two points per axis");
  FrequencyDomain dom;
  dom.lo.assign(d, std::numeric_limits<double>::infinity());
  dom.hi.assign(d, -std::numeric_limits<double>::infinity());
  long total = 1;
  for (int j = 0; j < d; ++j) total *= points;
  std::vector<double> y(d);
  for (long k = 0; k < total; ++k) {
    long r = k;
    for (int j = 0; j < d; ++j) {
      y[j] = ball.center[j] + ball.radius * (-1.0 + 2.0 * (r % points) / (points - 1));
      r /= points;
    }
    if (!ball.contains(y, -1e-12 * ball.radius)) continue;
    const auto w = frequency_map(H0, y);
    for (int j = 0; j < d; ++j) {
      dom.lo[j] = std::min(dom.lo[j], w[j]);
      dom.hi[j] = std::max(dom.hi[j], w[j]);
    }
  }
  return dom;
}

double analytic_constant(const FrequencyDomain& domain, double tau, int cutoff) {
  const int d = domain.dim();
  require(d >= 1 && d <= kMaxDim, ErrorKind::DimensionMismatch, "frequency dimension must be 1..3");
  require(tau > d - 1, ErrorKind::InvalidArgument, "the slab series needs tau > d - 1");
  // Each slab {|w.n| < gamma/|n|_1^tau} has Euclidean width 2 gamma/(|n|_1^tau |n|_2) and
  // cross-sections of diameter <= delta, hence (d-1)-volume <= V_{d-1} (delta/2)^{d-1}.
  // Summing over all n != 0 counts each slab twice, which absorbs the factor 2.
  double head = 0.0;
  for (const Index& n : box_indices(d, cutoff)) {
    const int k = l1(n);
    if (k == 0 || k > cutoff) continue;
    double e = 0.0;
    for (int j = 0; j < d; ++j) e += double(n[j]) * n[j];
    head += 1.0 / (std::pow(k, tau) * std::sqrt(e));
  }
  // #{|n|_1 = k} <= A_d k^{d-1} and |n|_2 >= |n|_1/sqrt(d).
  const double A[4] = {0.0, 2.0, 4.0, 6.0};
  const double tail = A[d] * std::sqrt(double(d)) * std::pow(cutoff, d - 1 - tau) / (tau + 1 - d);
  const double section = unit_ball_volume(d - 1) * std::pow(0.5 * domain.diameter(), d - 1);
  return section * (head + tail);
}

ComplementEstimate measure_complement(const FrequencyDomain& domain, const DiophantineParams& params,
                                      SamplingMethod method, long samples, std::uint64_t seed) {
  const int d = domain.dim();
  params.validate(d);
  require(samples >= 1000, ErrorKind::InvalidArgument, "measure_complement needs at least 1000 samples");
  for (int j = 0; j < d; ++j)
    require(domain.hi[j] > domain.lo[j], ErrorKind::InvalidArgument, "empty frequency box");
  const auto kpow = powers(params.tau, params.cutoff);

  long failed = 0, count = 0;
  std::vector<double> w(d);
  if (method == SamplingMethod::MonteCarlo) {
    std::mt19937_64 rng(seed);
    for (long s = 0; s < samples; ++s) {
      for (int j = 0; j < d; ++j) w[j] = domain.lo[j] + (domain.hi[j] - domain.lo[j]) * unit_draw(rng());
      failed += !passes(w, params.gamma, params.cutoff, kpow);
      ++count;
    }
  } else {
    // One jittered point per cell: cell midpoints alone form a rational lattice,
    // whose resonances are strongly correlated with the grid.
    std::mt19937_64 rng(seed);
    const long m = std::max<long>(2, std::lround(std::pow(double(samples), 1.0 / d)));
    long total = 1;
    for (int j = 0; j < d; ++j) total *= m;
    for (long k = 0; k < total; ++k) {
      long r = k;
      for (int j = 0; j < d; ++j) {
        w[j] = domain.lo[j] + (domain.hi[j] - domain.lo[j]) * ((r % m) + unit_draw(rng())) / m;
        r /= m;
      }
      failed += !passes(w, params.gamma, params.cutoff, kpow);
      ++count;
    }
  }
  ComplementEstimate e;
  e.gamma = params.gamma;
  e.samples = count;
  e.fraction = double(failed) / count;
  e.estimate = e.fraction * domain.measure();
  e.stderr_ = std::sqrt(e.fraction * (1.0 - e.fraction) / count) * domain.measure();
  e.analytic_bound = params.tau > d - 1 ? params.gamma * analytic_constant(domain, params.tau, params.cutoff)
                                        : std::numeric_limits<double>::infinity();
  return e;
}

std::size_t GoodSet::good_count() const { return static_cast<std::size_t>(std::count(good.begin(), good.end(), true)); }

GoodSet pullback_good_set(const FourierTaylor& H0, const ActionBall& ball, const DiophantineParams& params,
                          int points_per_axis, std::optional<std::uint64_t> jitter_seed) {
  const int d = H0.dim();
  params.validate(d);
  require(static_cast<int>(ball.center.size()) == d, ErrorKind::DimensionMismatch, "ball vs H0 dimension");
  require(points_per_axis >= 1, ErrorKind::InvalidArgument, "need at least one point per axis");
  const auto kpow = powers(params.tau, params.cutoff);
  const int m = points_per_axis;
  long total = 1;
  for (int j = 0; j < d; ++j) total *= m;
  GoodSet out;
  out.min_jacobian = std::numeric_limits<double>::infinity();
  std::vector<double> y(d);
  std::mt19937_64 rng(jitter_seed.value_or(0));
  long bad = 0;
  for (long k = 0; k < total; ++k) {
    long r = k;
    for (int j = 0; j < d; ++j) {
      const double offset = jitter_seed ? unit_draw(rng()) : 0.5;
      y[j] = ball.center[j] + ball.radius * (-1.0 + 2.0 * ((r % m) + offset) / m);
      r /= m;
    }
    if (!ball.contains(y)) continue;
    const double det = std::abs(check_nondegenerate(H0, y));
    out.min_jacobian = std::min(out.min_jacobian, det);
    out.max_jacobian = std::max(out.max_jacobian, det);
    const auto w = frequency_map(H0, y);
    const bool ok = passes(w, params.gamma, params.cutoff, kpow);
    bad += !ok;
    out.samples.push_back(y);
    out.good.push_back(ok);
  }
  require(!out.samples.empty(), ErrorKind::InsufficientSamples, "no grid point inside the ball");
  out.excluded_fraction = double(bad) / out.samples.size();
  out.excluded_measure = out.excluded_fraction * ball.measure();
  return out;
}

}  // namespace kam
