#include "kam/flow_oracle.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "kam/error.hpp"
#include "kam/half_spectrum.hpp"

namespace kam {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

// Flat list of terms y^a * Re(c e^{i n.x}) over canonical n.
class CompiledHamiltonian {
 public:
  explicit CompiledHamiltonian(const FourierTaylor& H) : dim_(H.dim()), cutoff_(H.cutoff()) {
    HalfSpectrum spec(H.dim(), H.cutoff());
    for (const auto& [a, f] : H.terms()) {
      const auto packed = spec.pack(f);
      for (std::size_t k = 0; k < packed.size(); ++k)
        if (packed[k] != Complex{}) terms_.push_back({a, spec.modes()[k], packed[k]});
    }
  }

  double value(std::span<const double> y, std::span<const double> x) const {
    Phases ph(x, dim_, cutoff_);
    double v = 0.0;
    for (const auto& t : terms_) v += monomial(y, t.a) * (t.c * ph(t.n)).real();
    return v;
  }

  // dy = -H_x, dx = H_y
  void field(const State& s, State& ds) const {
    std::span<const double> y(s.data(), dim_), x(s.data() + dim_, dim_);
    Phases ph(x, dim_, cutoff_);
    std::fill(ds.begin(), ds.end(), 0.0);
    for (const auto& t : terms_) {
      const Complex z = t.c * ph(t.n);
      const double re = z.real();
      const double ya = monomial(y, t.a);
      for (int j = 0; j < dim_; ++j) {
        // d/dx_j Re(c e^{i n.x}) = -n_j Im(c e^{i n.x})
        if (t.n[j] != 0) ds[j] += ya * t.n[j] * z.imag();
        if (t.a[j] > 0) {
          Index b = t.a;
          b[j] -= 1;
          ds[dim_ + j] += t.a[j] * monomial(y, b) * re;
        }
      }
    }
  }

 private:
  struct Term {
    Index a;
    Index n;
    Complex c;
  };

  double monomial(std::span<const double> y, const Index& a) const {
    double r = 1.0;
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < a[j]; ++k) r *= y[j];
    return r;
  }

  int dim_;
  int cutoff_;
  std::vector<Term> terms_;
};

FlowState to_flow_state(const State& s, const std::vector<double>& winding, int d, double t, long steps, double err) {
  FlowState out;
  out.y.assign(s.begin(), s.begin() + d);
  out.x.assign(s.begin() + d, s.end());
  for (int j = 0; j < d; ++j) out.x[j] += winding[j];
  out.x_wrapped = out.x;
  for (double& v : out.x_wrapped) {
    v = std::fmod(v, 2.0 * std::numbers::pi);
    if (v < 0.0) v += 2.0 * std::numbers::pi;
  }
  out.time = t;
  out.steps = steps;
  out.error_estimate = err;
  return out;
}

}  // namespace

double hamiltonian_value(const FlowSpec& spec, std::span<const double> y, std::span<const double> x) {
  return CompiledHamiltonian(spec.H).value(y, x);
}

std::vector<FlowState> integrate_times(const FlowSpec& spec, std::span<const double> y0, std::span<const double> x0,
                                       std::span<const double> times) {
  const int d = spec.H.dim();
  require(static_cast<int>(y0.size()) == d && static_cast<int>(x0.size()) == d, ErrorKind::DimensionMismatch,
          "initial point dimension");
  const CompiledHamiltonian H(spec.H);
  auto system = [&H](const State& s, State& ds, double) { H.field(s, ds); };
  auto stepper = odeint::make_controlled(spec.abs_tol, spec.rel_tol, odeint::runge_kutta_fehlberg78<State>());

  State s(2 * d);
  for (int j = 0; j < d; ++j) {
    s[j] = y0[j];
    s[d + j] = x0[j];
  }
  // Angles are integrated modulo 2 pi with whole turns kept in `winding`, so the
  // relative tolerance does not loosen as the unwrapped angle grows.
  std::vector<double> winding(d, 0.0);
  double t = 0.0;
  double dt = std::min(1e-2, spec.max_step);
  long steps = 0;
  double err = 0.0;
  std::vector<FlowState> out;
  for (double target : times) {
    require(std::isfinite(target) && target >= t - 1e-15 && std::abs(target) <= spec.max_time,
            ErrorKind::InvalidArgument, "integration times must be finite, nondecreasing and below max_time");
    while (t < target) {
      double h = std::min(dt, target - t);
      const bool clipped = h < dt;
      const double t_before = t;
      if (stepper.try_step(system, s, t, h) == odeint::success) {
        ++steps;
        for (int j = 0; j < d; ++j) {
          const double turns = 2.0 * std::numbers::pi * std::floor(s[d + j] / (2.0 * std::numbers::pi));
          s[d + j] -= turns;
          winding[j] += turns;
        }
        double scale = 0.0;
        for (double v : s) scale = std::max(scale, std::abs(v));
        err += spec.abs_tol + spec.rel_tol * scale;
        if (!clipped) dt = std::min(h, spec.max_step);
        if (spec.action_radius) {
          double r = 0.0;
          for (int j = 0; j < d; ++j) r += s[j] * s[j];
          if (std::sqrt(r) > *spec.action_radius) fail(ErrorKind::DomainExit, "trajectory left the action ball");
        }
        if (steps > spec.max_steps) fail(ErrorKind::ToleranceFailure, "step budget exhausted");
      } else {
        dt = h;
        if (dt < 1e-14 * std::max(1.0, std::abs(t_before)))
          fail(ErrorKind::ToleranceFailure, "step size underflow at t=" + std::to_string(t_before));
      }
    }
    out.push_back(to_flow_state(s, winding, d, t, steps, err));
  }
  return out;
}

FlowState integrate(const FlowSpec& spec, std::span<const double> y0, std::span<const double> x0, double t) {
  require(t >= 0.0, ErrorKind::InvalidArgument, "negative integration time; negate H to run backwards");
  const double times[1] = {t};
  return integrate_times(spec, y0, x0, times).front();
}

double phase_space_distance(std::span<const double> y1, std::span<const double> x1, std::span<const double> y2,
                            std::span<const double> x2) {
  double s = 0.0;
  for (std::size_t j = 0; j < y1.size(); ++j) s += (y1[j] - y2[j]) * (y1[j] - y2[j]);
  for (std::size_t j = 0; j < x1.size(); ++j) {
    const double diff = std::remainder(x1[j] - x2[j], 2.0 * std::numbers::pi);
    s += diff * diff;
  }
  return std::sqrt(s);
}

std::vector<Point> theta_grid(int dim, int points) {
  std::vector<Point> out;
  if (dim == 1) {
    for (int k = 0; k < points; ++k) out.push_back({2.0 * std::numbers::pi * k / points, 0.0, 0.0});
    return out;
  }
  // Generating vector chosen by hand for 32 nodes; reused for other counts.
  const int g[kMaxDim] = {1, 13, 7};
  for (int k = 0; k < points; ++k) {
    Point p{};
    for (int j = 0; j < dim; ++j) p[j] = 2.0 * std::numbers::pi * ((k * g[j]) % points) / points;
    out.push_back(p);
  }
  return out;
}

Verification verify_torus(const FlowSpec& spec, const Embedding& zeta, std::span<const double> omega,
                          const VerifyOptions& options) {
  const int d = spec.H.dim();
  double speed = 0.0;
  for (double w : omega) speed += w * w;
  speed = std::sqrt(speed);
  require(speed > 0.0, ErrorKind::InvalidArgument, "zero frequency");
  const double horizon = options.periods * 2.0 * std::numbers::pi / speed;
  std::vector<double> times;
  for (int k = 0; k <= options.time_samples; ++k) times.push_back(horizon * k / options.time_samples);

  Verification v;
  const CompiledHamiltonian H(spec.H);
  std::vector<double> y(d), x(d), yr(d), xr(d);
  for (const Point& theta : theta_grid(d, options.theta_points)) {
    zeta(std::span<const double>(theta.data(), d), y.data(), x.data());
    const double e0 = H.value(y, x);
    const auto states = integrate_times(spec, y, x, times);
    for (const auto& st : states) {
      Point shifted = theta;
      for (int j = 0; j < d; ++j) shifted[j] += omega[j] * st.time;
      zeta(std::span<const double>(shifted.data(), d), yr.data(), xr.data());
      v.invariance_error = std::max(v.invariance_error, phase_space_distance(st.y, st.x, yr, xr));
      v.energy_drift = std::max(v.energy_drift, std::abs(H.value(st.y, st.x) - e0));
    }
    v.steps += states.back().steps;
  }
  return v;
}

}  // namespace kam
