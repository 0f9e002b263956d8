#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "kam/error.hpp"
#include "kam/flow_oracle.hpp"
#include "kam/newton_scheme.hpp"
#include "support.hpp"

using namespace kam;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

FourierTaylor free_rotor(int dim) {
  FourierTaylor H(dim, 2, 0);
  for (int j = 0; j < dim; ++j) {
    Index a{};
    a[j] = 2;
    H.add_term(a, TrigPolynomial::constant(dim, 0, 0.5));
  }
  return H;
}

/// y^2/2 + eps cos x
FourierTaylor pendulum(double eps) {
  FourierTaylor H(1, 2, 1);
  H.add_term({2, 0, 0}, TrigPolynomial::constant(1, 1, 0.5));
  H.add_term({0, 0, 0}, TrigPolynomial::cosine(1, 1, {1, 0, 0}, eps));
  return H;
}

/// Classical RK4 on y' = eps sin x, x' = y with a fixed step.
std::array<double, 2> rk4_pendulum(double eps, double y, double x, double t, int n) {
  const double h = t / n;
  auto f = [eps](double yy, double xx) { return std::array<double, 2>{eps * std::sin(xx), yy}; };
  for (int i = 0; i < n; ++i) {
    const auto k1 = f(y, x);
    const auto k2 = f(y + 0.5 * h * k1[0], x + 0.5 * h * k1[1]);
    const auto k3 = f(y + 0.5 * h * k2[0], x + 0.5 * h * k2[1]);
    const auto k4 = f(y + h * k3[0], x + h * k3[1]);
    y += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    x += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
  }
  return {y, x};
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

TEST_CASE("free rotation is exact") {
  FlowSpec spec{free_rotor(2)};
  const std::vector<double> y{0.7, -0.3}, x{6.0, 1.0};
  const auto s = integrate(spec, y, x, 100.0);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(s.y[j] - y[j]) <= 1e-12);
    CHECK(std::abs(s.x[j] - (x[j] + 100.0 * y[j])) <= 1e-9);
    const double wrapped = std::fmod(std::fmod(s.x[j], kTwoPi) + kTwoPi, kTwoPi);
    CHECK(std::abs(s.x_wrapped[j] - wrapped) <= 1e-9);
    CHECK(s.x_wrapped[j] >= 0.0);
    CHECK(s.x_wrapped[j] < kTwoPi);
  }
  CHECK(s.time == doctest::Approx(100.0));
  CHECK(s.steps > 0);
}

TEST_CASE("pendulum: energy, independent integrator, composition, reversal") {
  const double eps = 0.1;
  FlowSpec spec{pendulum(eps)};
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const auto y0 = kamtest::random_point(rng, 1, -0.6, 0.6);
    const auto x0 = kamtest::random_point(rng, 1, 0.0, kTwoPi);
    const double E0 = hamiltonian_value(spec, y0, x0);
    CHECK(E0 == doctest::Approx(0.5 * y0[0] * y0[0] + eps * std::cos(x0[0])));

    const auto s = integrate(spec, y0, x0, 100.0);
    CHECK(std::abs(hamiltonian_value(spec, s.y, s.x) - E0) <= 1e-10);

    const auto r = rk4_pendulum(eps, y0[0], x0[0], 10.0, 20000);
    const auto s10 = integrate(spec, y0, x0, 10.0);
    CHECK(std::abs(s10.y[0] - r[0]) <= 1e-10);
    CHECK(std::abs(s10.x[0] - r[1]) <= 1e-10);

    // Phi^{3+7} = Phi^7 o Phi^3
    const auto s3 = integrate(spec, y0, x0, 3.0);
    const auto s37 = integrate(spec, s3.y, s3.x, 7.0);
    CHECK(phase_space_distance(s37.y, s37.x, s10.y, s10.x) <= 1e-10);

    // H is even in y, so flipping y and flowing again returns to the start.
    const std::vector<double> yb{-s10.y[0]};
    const auto back = integrate(spec, yb, s10.x, 10.0);
    const std::vector<double> yr{-back.y[0]};
    CHECK(phase_space_distance(yr, back.x, y0, x0) <= 1e-10);

    // One trajectory sampled at several times matches separate calls.
    const std::vector<double> times{0.0, 3.0, 10.0};
    const auto states = integrate_times(spec, y0, x0, times);
    REQUIRE(states.size() == 3);
    CHECK(states[0].y[0] == y0[0]);
    CHECK(phase_space_distance(states[1].y, states[1].x, s3.y, s3.x) <= 1e-10);
    CHECK(phase_space_distance(states[2].y, states[2].x, s10.y, s10.x) <= 1e-10);
    CHECK(std::abs(states[2].x[0] - s10.x[0]) <= 1e-10);  // unwrapped angles agree too
  }
}

TEST_CASE("flow failures") {
  SUBCASE("leaving the action ball") {
    FlowSpec spec{pendulum(1.0)};
    spec.action_radius = 0.45;
    const std::vector<double> y{0.4}, x{std::numbers::pi / 2};
    CHECK(kind_of([&] { integrate(spec, y, x, 5.0); }) == ErrorKind::DomainExit);
  }
  SUBCASE("step budget") {
    FlowSpec spec{pendulum(1.0)};
    spec.max_steps = 10;
    const std::vector<double> y{0.4}, x{1.0};
    CHECK(kind_of([&] { integrate(spec, y, x, 100.0); }) == ErrorKind::ToleranceFailure);
  }
}

TEST_CASE("distance and theta grid") {
  const std::vector<double> y{0.0}, a{0.1}, b{kTwoPi - 0.1};
  CHECK(phase_space_distance(y, a, y, b) == doctest::Approx(0.2));
  CHECK(theta_grid(1, 16).size() == 16);
  CHECK(theta_grid(2, 32).size() == 32);
  for (const auto& p : theta_grid(2, 32))
    for (double t : p) {
      CHECK(t >= 0.0);
      CHECK(t < kTwoPi);
    }
}

TEST_CASE("torus verification") {
  SUBCASE("flat torus of an integrable flow") {
    FourierTaylor H(1, 2, 0);
    H.add_term({2, 0, 0}, TrigPolynomial::constant(1, 0, 0.5));
    H.add_term({1, 0, 0}, TrigPolynomial::constant(1, 0, 1.0));
    FlowSpec spec{H};
    const std::vector<double> w{1.0};
    const auto exact = [](std::span<const double> th, double* y, double* x) {
      y[0] = 0.0;
      x[0] = th[0];
    };
    CHECK(verify_torus(spec, exact, w).invariance_error <= 1e-10);
    // Shifted by 1e-3 in action, the torus rotates with frequency 1.001.
    const auto shifted = [](std::span<const double> th, double* y, double* x) {
      y[0] = 1e-3;
      x[0] = th[0];
    };
    CHECK(verify_torus(spec, shifted, w).invariance_error >= 1e-2);
  }
  SUBCASE("Newton torus and its corruption") {
    const auto loc = localize(kamtest::pendulum_d1(), std::vector<double>{0.0}, 0.5, 0.5, 16, 2);
    const double eps = 1e-3;
    const auto t = run(loc, eps, 0.5, 1.0, Schedule{}, RunOptions{false});
    FlowSpec spec{loc.hamiltonian(eps)};
    const auto good = [&](std::span<const double> th, double* y, double* x) { t.embed(th, y, x); };
    const auto bad = [&](std::span<const double> th, double* y, double* x) {
      t.embed(th, y, x);
      y[0] += 1e-3;
    };
    const auto vg = verify_torus(spec, good, t.omega);
    CHECK(vg.invariance_error <= 1e-8);
    CHECK(vg.energy_drift <= 1e-10);
    CHECK(verify_torus(spec, bad, t.omega).invariance_error >= 1e-4);
  }
}
