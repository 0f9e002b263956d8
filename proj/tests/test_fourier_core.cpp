#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kam/angle_grid.hpp"
#include "kam/error.hpp"
#include "kam/fourier_taylor.hpp"
#include "kam/serialization.hpp"
#include "support.hpp"

using namespace kam;
using kamtest::kPhi;

namespace {

FourierTaylor random_series(std::mt19937_64& rng, int dim, int degree, int cutoff) {
  FourierTaylor f(dim, degree, cutoff);
  for (const auto& a : monomials(dim, degree)) f.set_term(a, kamtest::random_trig(rng, dim, cutoff, false));
  return f;
}

}  // namespace

TEST_CASE("add agrees with pointwise sums") {
  std::mt19937_64 rng(11);
  const auto f = random_series(rng, 2, 2, 4);
  const auto g = random_series(rng, 2, 2, 3);
  const auto h = f + g;
  CHECK(h.cutoff() == 4);
  for (int k = 0; k < 17; ++k) {
    const auto y = kamtest::random_point(rng, 2, -0.5, 0.5);
    const auto x = kamtest::random_point(rng, 2, 0.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(h.evaluate(y, x) - f.evaluate(y, x) - g.evaluate(y, x)) <= 1e-12);
  }
  const auto c = TrigPolynomial::cosine(2, 1, {1, 0, 0});
  CHECK(std::abs((c + c).coeff({1, 0, 0}) - Complex(1.0, 0.0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(f + FourierTaylor(1, 1, 1), Error);
}

TEST_CASE("mul: double-angle identity and pointwise products") {
  const auto c = FourierTaylor::from_trig(TrigPolynomial::cosine(1, 2, {1, 0, 0}), 0);
  const auto sq = mul(c, c);
  const auto t = sq.term(zero_index());
  CHECK(t.coeff({0, 0, 0}).real() == doctest::Approx(0.5));
  CHECK(t.coeff({2, 0, 0}).real() == doctest::Approx(0.25));
  CHECK(t.coeff({-2, 0, 0}).real() == doctest::Approx(0.25));

  std::mt19937_64 rng(5);
  const auto f = random_series(rng, 2, 1, 3);
  const auto g = random_series(rng, 2, 1, 3);
  double residual = 0.0;
  const auto p = mul(f, g, &residual, 0.3);
  for (int k = 0; k < 20; ++k) {
    const auto y = kamtest::random_point(rng, 2, -0.3 / std::sqrt(2.0), 0.3 / std::sqrt(2.0));
    const auto x = kamtest::random_point(rng, 2, 0.0, 2.0 * std::numbers::pi);
    CHECK(std::abs(p.evaluate(y, x) - f.evaluate(y, x) * g.evaluate(y, x)) <= residual + 1e-10);
  }
  CHECK(p.reality_defect() <= 1e-14);
  // Submultiplicativity up to the residual.
  CHECK(norm(p, 0.0, 0.3).value <= norm(f, 0.0, 0.3).value * norm(g, 0.0, 0.3).value + residual + 1e-12);
}

TEST_CASE("partial derivatives match central differences") {
  std::mt19937_64 rng(7);
  const auto f = random_series(rng, 2, 3, 4);
  const double h = 1e-5;
  for (int k = 0; k < 50; ++k) {
    auto y = kamtest::random_point(rng, 2, -0.5, 0.5);
    auto x = kamtest::random_point(rng, 2, 0.0, 2.0 * std::numbers::pi);
    for (int j = 0; j < 2; ++j) {
      auto yp = y, ym = y, xp = x, xm = x;
      yp[j] += h;
      ym[j] -= h;
      xp[j] += h;
      xm[j] -= h;
      const double dy = (f.evaluate(yp, x) - f.evaluate(ym, x)) / (2 * h);
      const double dx = (f.evaluate(y, xp) - f.evaluate(y, xm)) / (2 * h);
      CHECK(std::abs(partial_action(f, j).evaluate(y, x) - dy) <= 1e-6 * std::max(1.0, std::abs(dy)));
      CHECK(std::abs(partial_angle(f, j).evaluate(y, x) - dx) <= 1e-6 * std::max(1.0, std::abs(dx)));
    }
  }
  const auto dc = partial_angle(FourierTaylor::from_trig(TrigPolynomial::cosine(2, 1, {1, 0, 0}), 0), 0);
  const double x0[2] = {0.7, 0.0}, y0[2] = {0.0, 0.0};
  CHECK(dc.evaluate(y0, x0) == doctest::Approx(-std::sin(0.7)));
  const auto dy = partial_action(FourierTaylor::monomial(2, 2, 0, {2, 0, 0}, 1.0), 0);
  CHECK(dy.term({1, 0, 0}).mean().real() == doctest::Approx(2.0));
}

TEST_CASE("average equals grid quadrature") {
  std::mt19937_64 rng(3);
  const auto f = random_series(rng, 2, 1, 4);
  const auto avg = average(f);
  const AngleGrid grid(2, 9);
  const double y[2] = {0.2, -0.1};
  double q = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point p = grid.point(k);
    q += f.evaluate(y, std::span<const double>(p.data(), 2));
  }
  q /= double(grid.size());
  const double x0[2] = {1.3, 2.9};
  CHECK(std::abs(avg.evaluate(y, x0) - q) <= 1e-13);
  CHECK(average(FourierTaylor::from_trig(TrigPolynomial::cosine(2, 1, {1, 0, 0}), 0)).max_abs() == 0.0);
}

TEST_CASE("cohomological solve is exact on the truncation") {
  const std::vector<double> w{1.0, kPhi};
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = kamtest::random_trig(rng, 2, 8, true);
    const auto sol = solve_cohomological(f, w, 1.0);
    const auto back = directional_derivative(sol.solution, w);
    double err = 0.0;
    for (const auto& [n, c] : f.coeffs()) err = std::max(err, std::abs(back.coeff(n) - c) / std::abs(c));
    CHECK(err <= 1e-12);
    // partial_angle commutes with the solve on zero-mean input.
    const auto lhs = derivative(sol.solution, 0);
    const auto rhs = solve_cohomological(derivative(f, 0), w, 1.0).solution;
    for (const auto& [n, c] : lhs.coeffs()) CHECK(std::abs(rhs.coeff(n) - c) <= 1e-12 * std::max(1.0, std::abs(c)));
  }
}

TEST_CASE("cohomological solve: single mode, mean and resonance errors") {
  const std::vector<double> w{1.0, kPhi};
  TrigPolynomial f(2, 1);
  f.set({1, 0, 0}, 1.0);
  f.set({-1, 0, 0}, 1.0);
  const auto F = solve_cohomological(f, w, 1.0).solution;
  const double x[2] = {0.4, 1.1};
  CHECK(F.evaluate(x) == doctest::Approx(2.0 * std::sin(0.4)));

  CHECK_THROWS_AS(solve_cohomological(TrigPolynomial::constant(2, 1, 1.0), w, 1.0), Error);
  const std::vector<double> resonant{0.0, 1.0};
  try {
    solve_cohomological(TrigPolynomial::cosine(2, 1, {1, 0, 0}), resonant, 1.0);
    FAIL("expected ResonantDivisor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ResonantDivisor);
  }
}

TEST_CASE("weighted norm: closed form, grid sup bound, Cauchy decay") {
  CHECK(norm(FourierTaylor(2, 1, 2), 0.3, 1.0).value == 0.0);
  const auto c = FourierTaylor::from_trig(TrigPolynomial::cosine(2, 1, {1, 0, 0}), 0);
  CHECK(norm(c, 0.7, 1.0).value == doctest::Approx(std::exp(0.7)));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto f = random_series(rng, 2, 2, 3);
    const double rho = 0.4;
    double sup = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const auto y = kamtest::random_point(rng, 2, -rho / std::sqrt(2.0), rho / std::sqrt(2.0));
      const auto x = kamtest::random_point(rng, 2, 0.0, 2.0 * std::numbers::pi);
      sup = std::max(sup, std::abs(f.evaluate(y, x)));
    }
    CHECK(sup <= norm(f, 0.0, rho).value);
    CHECK(norm(f, 0.2, rho).value <= norm(f, 0.3, rho).value);
    CHECK(norm(f, 0.2, 0.3).value <= norm(f, 0.2, 0.4).value);
    const double xi = 0.5, delta = 0.2;
    CHECK(norm(partial_angle(f, 0), xi - delta, rho).value <= norm(f, xi, rho).value / (std::exp(1.0) * delta));
  }
}

TEST_CASE("angle composition: identity, phase shift, pointwise oracle") {
  std::mt19937_64 rng(21);
  const auto f = random_series(rng, 2, 1, 4);
  const TrigVector zero = zero_vector(2, 4);
  const auto same = compose_angle_map(f, zero, 0.0).result;
  CHECK((same - f).max_abs() <= 1e-13);

  const auto fe = FourierTaylor::from_trig(TrigPolynomial::cosine(2, 2, {1, 0, 0}), 0);
  TrigVector shift{TrigPolynomial::constant(2, 2, 0.3), TrigPolynomial::constant(2, 2, -0.2)};
  const auto shifted = compose_angle_map(fe, shift, 0.5).result.term(zero_index());
  CHECK(std::abs(shifted.coeff({1, 0, 0}) - std::polar(0.5, 0.5 * 0.3)) <= 1e-13);

  TrigVector alpha{kamtest::random_trig(rng, 2, 3, true), kamtest::random_trig(rng, 2, 3, true)};
  const double eps = 1e-3;
  const auto comp = compose_angle_map(f, alpha, eps);
  for (int k = 0; k < 100; ++k) {
    const auto y = kamtest::random_point(rng, 2, -0.3, 0.3);
    auto x = kamtest::random_point(rng, 2, 0.0, 2.0 * std::numbers::pi);
    std::vector<double> xs(2);
    for (int j = 0; j < 2; ++j) xs[j] = x[j] + eps * alpha[j].evaluate(x);
    CHECK(std::abs(comp.result.evaluate(y, x) - f.evaluate(y, xs)) <= comp.aliasing_residual + 1e-10);
  }
  try {
    compose_angle_map(f, alpha, 10.0);
    FAIL("expected StripOverflow");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::StripOverflow);
  }
}

TEST_CASE("action shift is an exact Taylor shift") {
  std::mt19937_64 rng(4);
  const auto f = random_series(rng, 2, 3, 2);
  const std::vector<double> y0{0.3, -0.7};
  const auto g = shift_action(f, y0);
  for (int k = 0; k < 20; ++k) {
    const auto y = kamtest::random_point(rng, 2, -1.0, 1.0);
    const auto x = kamtest::random_point(rng, 2, 0.0, 6.0);
    const std::vector<double> ys{y0[0] + y[0], y0[1] + y[1]};
    CHECK(std::abs(g.evaluate(y, x) - f.evaluate(ys, x)) <= 1e-12);
  }
}

TEST_CASE("grid projection inverts sampling") {
  std::mt19937_64 rng(8);
  const auto f = kamtest::random_trig(rng, 3, 3, false);
  const AngleGrid grid(3, product_grid_points(3));
  const auto back = grid.project_real(grid.sample_real(f), 3);
  for (const auto& [n, c] : f.coeffs()) CHECK(std::abs(back.coeff(n) - c) <= 1e-12);
  CHECK(back.reality_defect() <= 1e-14);
}

TEST_CASE("series JSON round trip") {
  std::mt19937_64 rng(12);
  const auto f = random_series(rng, 2, 2, 3);
  const auto g = fourier_taylor_from_json(to_json(f));
  CHECK((g - f).max_abs() == 0.0);
  CHECK_THROWS_AS(fourier_taylor_from_json(Json::parse(R"({"dim": 2})")), Error);
}
