#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include "kam/diophantine.hpp"
#include "kam/error.hpp"
#include "support.hpp"

using namespace kam;
using kamtest::kPhi;

namespace {

/// Brute-force margin over 0 < |n|_1 <= cutoff in d = 2.
double brute_margin(double w1, double w2, double tau, int cutoff) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = -cutoff; a <= cutoff; ++a)
    for (int b = -cutoff + std::abs(a); b <= cutoff - std::abs(a); ++b) {
      if (a == 0 && b == 0) continue;
      const double l1 = std::abs(a) + std::abs(b);
      best = std::min(best, std::abs(a * w1 + b * w2) * std::pow(l1, tau));
    }
  return best;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Parse;
}

}  // namespace

TEST_CASE("golden frequency: margin and witness") {
  const std::vector<double> w{1.0, kPhi};
  const auto c = check(w, {0.5, 1.0, 1000});
  CHECK(c.pass);
  CHECK(c.margin == doctest::Approx(brute_margin(1.0, kPhi, 1.0, 1000)).epsilon(1e-12));
  CHECK(c.margin == doctest::Approx(kPhi).epsilon(1e-12));
  CHECK(c.witness[0] == 0);
  CHECK(c.witness[1] == 1);
  CHECK(max_gamma(w, 1.0, 1000) == doctest::Approx(kPhi).epsilon(1e-12));
  CHECK_FALSE(check(w, {0.7, 1.0, 1000}).pass);
}

TEST_CASE("random frequencies agree with brute force") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const auto w = kamtest::random_point(rng, 2, -2.0, 2.0);
    const double tau = k % 2 ? 1.0 : 1.5;
    const auto c = check(w, {0.0, tau, 60});
    CHECK(c.margin == doctest::Approx(brute_margin(w[0], w[1], tau, 60)).epsilon(1e-12));
    const double l1 = std::abs(c.witness[0]) + std::abs(c.witness[1]);
    CHECK(std::abs(w[0] * c.witness[0] + w[1] * c.witness[1]) * std::pow(l1, tau) ==
          doctest::Approx(c.margin).epsilon(1e-12));
    CHECK((c.witness[0] > 0 || (c.witness[0] == 0 && c.witness[1] > 0)));
  }
}

TEST_CASE("exact resonance") {
  const std::vector<double> w{1.0, 0.5};
  const auto c = check(w, {0.0, 1.0, 100});
  CHECK(c.margin == 0.0);
  CHECK(c.witness[0] == 1);
  CHECK(c.witness[1] == -2);
  CHECK(kind_of([&] { max_gamma(w, 1.0, 100); }) == ErrorKind::ExactResonance);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(DiophantineParams{0.1, 1.0, 10}.validate(2));
  CHECK_THROWS_AS(DiophantineParams({-0.1, 1.0, 10}).validate(2), Error);
  CHECK_THROWS_AS(DiophantineParams({0.1, 0.5, 10}).validate(2), Error);
  CHECK_THROWS_AS(DiophantineParams({0.1, 2.5, 10}).validate(4), Error);
  CHECK_THROWS_AS(DiophantineParams({0.1, 1.0, 0}).validate(2), Error);
  CHECK(default_diophantine_cutoff(2) == 1000);
  CHECK(default_diophantine_cutoff(3) == 100);
}

TEST_CASE("complement measure on the unit square") {
  const FrequencyDomain dom{{1.0, 1.0}, {2.0, 2.0}};
  CHECK(dom.measure() == doctest::Approx(1.0));
  CHECK(dom.diameter() == doctest::Approx(std::sqrt(2.0)));
  const DiophantineParams p{0.02, 1.5, 60};

  const auto mc = measure_complement(dom, p, SamplingMethod::MonteCarlo, 20000, 11);
  const auto grid = measure_complement(dom, p, SamplingMethod::Grid, 20000, 11);
  CHECK(mc.samples == 20000);
  CHECK(std::abs(mc.estimate - grid.estimate) <= 3.0 * std::hypot(mc.stderr_, grid.stderr_));
  CHECK(mc.analytic_bound >= mc.estimate);
  CHECK(mc.analytic_bound == doctest::Approx(analytic_constant(dom, 1.5, 60) * 0.02));

  // Independent estimate from our own sampler and brute-force check.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  int bad = 0;
  const int n = 4000;
  for (int k = 0; k < n; ++k)
    if (brute_margin(u(rng), u(rng), 1.5, 60) < 0.02) ++bad;
  const double own = double(bad) / n;
  const double own_se = std::sqrt(own * (1 - own) / n);
  CHECK(std::abs(own - mc.estimate) <= 4.0 * std::hypot(own_se, mc.stderr_));

  // Same seed, same answer.
  CHECK(measure_complement(dom, p, SamplingMethod::MonteCarlo, 20000, 11).estimate == mc.estimate);
  CHECK_THROWS_AS(measure_complement(dom, p, SamplingMethod::MonteCarlo, 999, 1), Error);
}

TEST_CASE("complement scales linearly in gamma") {
  const FrequencyDomain dom{{1.0, 1.0}, {2.0, 2.0}};
  std::vector<double> g, m;
  for (double gamma : {0.01, 0.02, 0.04}) {
    g.push_back(gamma);
    m.push_back(measure_complement(dom, {gamma, 1.5, 100}, SamplingMethod::MonteCarlo, 40000, 3).estimate);
  }
  CHECK(kamtest::loglog_slope(g, m) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("frequency domain and pullback of the good set") {
  const auto pr = kamtest::standard_d2({1.5, 1.5}, 0.5);
  const auto dom = frequency_domain(pr.H0, pr.V);
  for (int j = 0; j < 2; ++j) {
    CHECK(dom.lo[j] <= 1.05);
    CHECK(dom.lo[j] >= 1.0 - 1e-12);
    CHECK(dom.hi[j] >= 1.95);
    CHECK(dom.hi[j] <= 2.0 + 1e-12);
  }

  const DiophantineParams p{0.05, 1.0, 100};
  const auto gs = pullback_good_set(pr.H0, pr.V, p, 12, 5);
  REQUIRE(!gs.samples.empty());
  std::size_t good = 0;
  for (std::size_t i = 0; i < gs.samples.size(); ++i) {
    const auto& y = gs.samples[i];
    CHECK(std::hypot(y[0] - 1.5, y[1] - 1.5) <= 0.5);
    // w0 is the identity here, so goodness is the check at y itself.
    CHECK(gs.good[i] == (brute_margin(y[0], y[1], 1.0, 100) >= 0.05));
    good += gs.good[i];
  }
  CHECK(gs.good_count() == good);
  CHECK(gs.excluded_fraction == doctest::Approx(1.0 - double(good) / gs.samples.size()));
  CHECK(gs.min_jacobian == doctest::Approx(1.0));
  CHECK(gs.max_jacobian == doctest::Approx(1.0));
}

TEST_CASE("unit draw") {
  CHECK(unit_draw(0) == 0.0);
  CHECK(unit_draw(~std::uint64_t{0}) < 1.0);
  CHECK(unit_draw(std::uint64_t{1} << 63) == 0.5);
}
