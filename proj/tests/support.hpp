#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "kam/hamiltonian.hpp"
#include "kam/trig_polynomial.hpp"

namespace kamtest {

inline const double kPhi = (std::sqrt(5.0) - 1.0) / 2.0;

/// H0 = |y|^2/2, P = cos x1 + cos(x1 + x2) on the ball V.
inline kam::NearlyIntegrable standard_d2(std::vector<double> center = {1.0, 1.0}, double radius = 1.2) {
  kam::NearlyIntegrable pr;
  pr.H0 = kam::FourierTaylor(2, 2, 0);
  pr.H0.add_term({2, 0, 0}, kam::TrigPolynomial::constant(2, 0, 0.5));
  pr.H0.add_term({0, 2, 0}, kam::TrigPolynomial::constant(2, 0, 0.5));
  kam::FourierTaylor P(2, 0, 1);
  P.add_term({0, 0, 0}, kam::TrigPolynomial::cosine(2, 1, {1, 0, 0}) + kam::TrigPolynomial::cosine(2, 1, {1, 1, 0}));
  pr.P = {P};
  pr.V = {std::move(center), radius};
  pr.eps0 = 1.0;
  return pr;
}

/// H0 = y^2/2 + y, P = cos x, so w = 1 at y = 0.
inline kam::NearlyIntegrable pendulum_d1() {
  kam::NearlyIntegrable pr;
  pr.H0 = kam::FourierTaylor(1, 2, 0);
  pr.H0.add_term({2, 0, 0}, kam::TrigPolynomial::constant(1, 0, 0.5));
  pr.H0.add_term({1, 0, 0}, kam::TrigPolynomial::constant(1, 0, 1.0));
  kam::FourierTaylor P(1, 0, 1);
  P.add_term({0, 0, 0}, kam::TrigPolynomial::cosine(1, 1, {1, 0, 0}));
  pr.P = {P};
  pr.V = {{0.0}, 0.8};
  pr.eps0 = 1.0;
  return pr;
}

/// Real trig polynomial with independent normal coefficients on |n|_inf <= cutoff.
inline kam::TrigPolynomial random_trig(std::mt19937_64& rng, int dim, int cutoff, bool zero_mean) {
  std::normal_distribution<double> g;
  kam::TrigPolynomial f(dim, cutoff);
  for (const auto& n : kam::box_indices(dim, cutoff)) {
    if (!kam::is_canonical(n)) continue;
    if (kam::is_zero(n)) {
      if (!zero_mean) f.set(n, g(rng));
      continue;
    }
    f.set_real_pair(n, {g(rng), g(rng)});
  }
  return f;
}

inline std::vector<double> random_point(std::mt19937_64& rng, int dim, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(dim);
  for (double& v : p) v = u(rng);
  return p;
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace kamtest
