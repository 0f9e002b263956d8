#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "kam/error.hpp"
#include "kam/hamiltonian.hpp"
#include "kam/serialization.hpp"
#include "support.hpp"

using namespace kam;

namespace {

FourierTaylor random_quartic(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  FourierTaylor H(dim, 4, 0);
  for (const auto& a : monomials(dim, 4)) H.add_term(a, TrigPolynomial::constant(dim, 0, g(rng)));
  return H;
}

double eval0(const FourierTaylor& H, const std::vector<double>& y) {
  const double x[3] = {0.0, 0.0, 0.0};
  return H.evaluate(y, std::span<const double>(x, y.size()));
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

TEST_CASE("frequency map: closed forms and central differences") {
  const auto pr = kamtest::standard_d2();
  const std::vector<double> y{0.3, -1.2};
  const auto w = frequency_map(pr.H0, y);
  CHECK(w[0] == doctest::Approx(0.3));
  CHECK(w[1] == doctest::Approx(-1.2));

  FourierTaylor H(2, 3, 0);
  H.add_term({2, 0, 0}, TrigPolynomial::constant(2, 0, 0.5));
  H.add_term({0, 3, 0}, TrigPolynomial::constant(2, 0, 1.0 / 3.0));
  const auto w1 = frequency_map(H, std::vector<double>{1.0, 1.0});
  CHECK(w1[0] == doctest::Approx(1.0));
  CHECK(w1[1] == doctest::Approx(1.0));

  std::mt19937_64 rng(1);
  const auto Q = random_quartic(rng, 2);
  const double h = 1e-5;
  for (int k = 0; k < 20; ++k) {
    const auto p = kamtest::random_point(rng, 2, -1.0, 1.0);
    const auto wq = frequency_map(Q, p);
    for (int j = 0; j < 2; ++j) {
      auto pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      CHECK(std::abs(wq[j] - (eval0(Q, pp) - eval0(Q, pm)) / (2 * h)) <= 1e-8 * std::max(1.0, std::abs(wq[j])));
    }
    // Directional derivative along a random direction.
    const auto dir = kamtest::random_point(rng, 2, -1.0, 1.0);
    auto pp = p, pm = p;
    for (int j = 0; j < 2; ++j) {
      pp[j] += h * dir[j];
      pm[j] -= h * dir[j];
    }
    const double fd = (eval0(Q, pp) - eval0(Q, pm)) / (2 * h);
    CHECK(std::abs(wq[0] * dir[0] + wq[1] * dir[1] - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("nondegeneracy: determinant and degenerate Hessian") {
  const auto pr = kamtest::standard_d2();
  CHECK(check_nondegenerate(pr.H0, std::vector<double>{0.4, 0.1}) == doctest::Approx(1.0));

  FourierTaylor flat(2, 2, 0);
  flat.add_term({2, 0, 0}, TrigPolynomial::constant(2, 0, 0.5));
  CHECK(kind_of([&] { check_nondegenerate(flat, std::vector<double>{1.0, 1.0}); }) == ErrorKind::DegenerateHessian);

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(i, j) = g(rng);
    const Eigen::Matrix3d A = M * M.transpose() + Eigen::Matrix3d::Identity();
    FourierTaylor H(3, 2, 0);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        Index a{};
        a[i] += 1;
        a[j] += 1;
        H.add_term(a, TrigPolynomial::constant(3, 0, i == j ? 0.5 * A(i, i) : A(i, j)));
      }
    const double eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(A).eigenvalues().prod();
    CHECK(std::abs(check_nondegenerate(H, std::vector<double>{0.1, 0.2, 0.3}) - eig) <= 1e-10 * eig);
  }
}

TEST_CASE("localize: exact quadratic and binomial expansions") {
  auto pr = kamtest::standard_d2({1.0, 0.0}, 1.0);
  const auto loc = localize(pr, std::vector<double>{1.0, 0.0}, 0.5, 0.5, 4, 2);
  CHECK(loc.knf.E == doctest::Approx(0.5));
  CHECK(loc.knf.omega[0] == doctest::Approx(1.0));
  CHECK(loc.knf.omega[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(loc.knf.Q.term({2, 0, 0}).mean().real() == doctest::Approx(0.5));
  CHECK(loc.knf.Q.term({0, 2, 0}).mean().real() == doctest::Approx(0.5));
  CHECK(loc.knf.Q.degree_part(0, 1).max_abs() == 0.0);

  NearlyIntegrable q;
  q.H0 = FourierTaylor(1, 4, 0);
  q.H0.add_term({4, 0, 0}, TrigPolynomial::constant(1, 0, 1.0));
  q.P = {FourierTaylor(1, 0, 1)};
  q.V = {{1.0}, 1.0};
  const auto l1 = localize(q, std::vector<double>{1.0}, 0.5, 0.5, 2, 4);
  CHECK(l1.knf.E == doctest::Approx(1.0));
  CHECK(l1.knf.omega[0] == doctest::Approx(4.0));
  CHECK(l1.knf.Q.term({2, 0, 0}).mean().real() == doctest::Approx(6.0));
  CHECK(l1.knf.Q.term({3, 0, 0}).mean().real() == doctest::Approx(4.0));
  CHECK(l1.knf.Q.term({4, 0, 0}).mean().real() == doctest::Approx(1.0));
}

TEST_CASE("localize: reconstruction of a random quartic and of the perturbation") {
  std::mt19937_64 rng(3);
  NearlyIntegrable pr;
  pr.H0 = random_quartic(rng, 2);
  // Keep the Hessian at the anchor well conditioned.
  pr.H0.add_term({2, 0, 0}, TrigPolynomial::constant(2, 0, 5.0));
  pr.H0.add_term({0, 2, 0}, TrigPolynomial::constant(2, 0, 5.0));
  FourierTaylor P(2, 1, 2);
  P.add_term({0, 0, 0}, kamtest::random_trig(rng, 2, 2, false));
  P.add_term({1, 0, 0}, kamtest::random_trig(rng, 2, 2, false));
  pr.P = {P};
  pr.V = {{0.2, -0.1}, 1.0};
  const std::vector<double> anchor{0.3, 0.1};
  const auto loc = localize(pr, anchor, 0.5, 0.5, 2, 4);
  const auto K = loc.knf.hamiltonian();
  const auto Pl = loc.perturbation(1.0);
  for (int k = 0; k < 20; ++k) {
    const auto y = kamtest::random_point(rng, 2, -0.35, 0.35);
    const auto x = kamtest::random_point(rng, 2, 0.0, 6.2);
    const std::vector<double> ya{anchor[0] + y[0], anchor[1] + y[1]};
    CHECK(std::abs(K.evaluate(y, x) - pr.H0.evaluate(ya, x)) <= 1e-10);
    CHECK(std::abs(Pl.evaluate(y, x) - P.evaluate(ya, x)) <= 1e-10);
  }
  CHECK(loc.knf.E == doctest::Approx(eval0(pr.H0, anchor)));
}

TEST_CASE("localize: domain and degeneracy errors") {
  const auto pr = kamtest::standard_d2({1.0, 1.0}, 0.6);
  CHECK(kind_of([&] { localize(pr, std::vector<double>{1.0, 0.5}, 0.5, 0.5, 4, 2); }) == ErrorKind::DomainOverflow);
  NearlyIntegrable flat = pr;
  flat.H0 = FourierTaylor(2, 2, 0);
  flat.H0.add_term({2, 0, 0}, TrigPolynomial::constant(2, 0, 0.5));
  CHECK(kind_of([&] { localize(flat, std::vector<double>{1.0, 1.0}, 0.5, 0.5, 4, 2); }) ==
        ErrorKind::DegenerateHessian);
}

TEST_CASE("problem JSON round trip and file errors") {
  const auto pr = kamtest::standard_d2();
  const auto back = problem_from_json(to_json(pr));
  CHECK(back.dim() == 2);
  CHECK((back.H0 - pr.H0).max_abs() == 0.0);
  CHECK((back.P[0] - pr.P[0]).max_abs() == 0.0);
  CHECK(back.V.radius == pr.V.radius);
  try {
    load_problem("/nonexistent/problem.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/problem.json") != std::string::npos);
  }
}
