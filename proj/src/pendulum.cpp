#include "ckam/error.hpp"
#include "ckam/variational.hpp"

#include <boost/math/special_functions/ellint_rd.hpp>
#include <boost/math/special_functions/ellint_rf.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

namespace ckam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

using boost::math::ellint_rd;
using boost::math::ellint_rf;

// Motion of 1/2 qdot^2 - 2g sin^2(q/2) = E along q in [0, 4pi), monotone
// increasing. With psi = pi/2 - q/2 every integral is a Legendre form in psi.
struct Leg {
  double g, E, c, mc, m;  // c = 2E + 4g, mc = 2E/c, m = 4g/c

  Leg(double g_, double E_) : g(g_), E(E_), c(2 * E_ + 4 * g_), mc(2 * E_ / c), m(4 * g_ / c) {}

  double U(double q) const {
    double s = std::sin(0.5 * q);
    return 2 * g * s * s;
  }
  double speed(double q) const {
    double s = std::sin(0.5 * q);
    return std::sqrt(std::max(0.0, 2 * E + 4 * g * s * s));
  }

  // F(psi|m) and E(psi|m) for q in [0, 2pi], shifted by complete integrals above.
  void forms(double q, double& F, double* E2) const {
    int wraps = 0;
    while (q > kTwoPi) {
      q -= kTwoPi;
      ++wraps;
    }
    // reflect about 2pi so q = 2pi gives cp = 0 exactly
    const double h = q > kPi ? 0.5 * (kTwoPi - q) : 0.5 * q;
    const double sp = q > kPi ? -std::cos(h) : std::cos(h), cp = std::sin(h);
    const double x = cp * cp, y = std::max(0.0, cp * cp + mc * sp * sp);
    F = sp * ellint_rf(x, y, 1.0);
    if (E2) *E2 = F - (m / 3.0) * sp * sp * sp * (sp == 0.0 ? 0.0 : ellint_rd(x, y, 1.0));
    if (wraps > 0) {
      const double K = ellint_rf(0.0, mc, 1.0);
      F -= 2.0 * wraps * K;
      if (E2) *E2 -= 2.0 * wraps * (K - (m / 3.0) * ellint_rd(0.0, mc, 1.0));
    }
  }
  double F(double q) const {
    double f;
    forms(q, f, nullptr);
    return f;
  }
  // time from qa to q
  double time(double qa, double q) const { return 2.0 / std::sqrt(c) * (F(qa) - F(q)); }
  double action(double qa, double qb, double tau) const {
    double fa, ea, fb, eb;
    forms(qa, fa, &ea);
    forms(qb, fb, &eb);
    return 2.0 * std::sqrt(c) * (ea - eb) - E * tau;
  }
};

// Solves for q with time(qa, q) = target inside [lo, hi]; Fa = F(qa).
double invert_time(const Leg& leg, double Fa, double target, double lo, double hi, double guess) {
  const double k = 2.0 / std::sqrt(leg.c);
  double q = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    double r = k * (Fa - leg.F(q)) - target;  // increasing in q
    if (r > 0) hi = q;
    else lo = q;
    double sp = leg.speed(q);
    double next = q - r * sp;
    if (!(next > lo && next < hi) || sp == 0.0) next = 0.5 * (lo + hi);
    if (std::fabs(next - q) <= 1e-15 * std::max(1.0, std::fabs(q)) || hi - lo <= 1e-15 * std::max(1.0, hi))
      return next;
    q = next;
  }
  return q;
}

}  // namespace

PendulumBvp pendulum_bvp(double g, double q_a, double q_b, double t_a, double t_b, std::size_t samples) {
  if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("pendulum_bvp: g must be >= 0");
  const double T = t_b - t_a;
  if (!(T > 0.0)) throw DomainError("pendulum_bvp: need t_b > t_a");
  if (std::fabs(q_b - q_a) > kTwoPi * (1 + 1e-15)) throw DomainError("pendulum_bvp: |q_b - q_a| > 2 pi");

  PendulumBvp out;
  out.g = g;
  out.q_a = q_a;
  out.q_b = q_b;
  out.t_a = t_a;
  out.t_b = t_b;
  if (samples == 0)
    samples = static_cast<std::size_t>(std::max(2000.0, std::ceil(100.0 * T * std::max(1.0, std::sqrt(g)))));
  samples += samples % 2;

  if (q_a == q_b) {
    if (std::fabs(std::sin(q_a)) > 1e-15) throw BvpError("pendulum_bvp: no monotone solution with q_a = q_b", {});
    out.energy = -2 * g * std::sin(0.5 * q_a) * std::sin(0.5 * q_a);
    out.action = out.action_closed_form = T * 2 * g * std::sin(0.5 * q_a) * std::sin(0.5 * q_a);
    for (std::size_t i = 0; i <= samples; ++i) {
      out.t.push_back(t_a + T * static_cast<double>(i) / static_cast<double>(samples));
      out.q.push_back(q_a);
      out.qdot.push_back(0.0);
    }
    return out;
  }

  // reduce to increasing motion starting in [0, 2pi)
  const double sign = q_b > q_a ? 1.0 : -1.0;
  double a = sign * q_a, b = sign * q_b;
  const double shift = kTwoPi * std::floor(a / kTwoPi);
  a -= shift;
  b -= shift;

  auto Uof = [g](double q) {
    double s = std::sin(0.5 * q);
    return 2 * g * s * s;
  };
  // U vanishes on the segment only at multiples of 2pi
  const bool separatrix = a == 0.0 || b >= kTwoPi;
  const double E_min = separatrix ? 0.0 : -std::min(Uof(a), Uof(b));

  std::vector<std::pair<double, double>> scan;
  auto flight = [&](double e) {
    Leg leg(g, E_min + e);
    double tau = leg.time(a, b);
    scan.emplace_back(std::sqrt(std::max(0.0, 2 * (leg.E + Uof(a)))), tau - T);
    return tau;
  };

  if (!separatrix) {
    double tmax = flight(0.0);
    if (T > tmax)
      throw BvpError("pendulum_bvp: no shooting bracket found (horizon exceeds the monotone flight time)", scan);
  }
  double lo = 1e-300, hi = std::max(1.0, g);
  while (flight(hi) > T) {
    hi *= 4;
    if (hi > 1e300) throw BvpError("pendulum_bvp: no shooting bracket found", scan);
  }
  if (separatrix && flight(lo) < T) throw BvpError("pendulum_bvp: no shooting bracket found", scan);
  int steps = 0;
  while (hi - lo > 1e-15 * hi && steps < 400) {
    double mid = hi > 4 * lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (flight(mid) > T) lo = mid;
    else hi = mid;
    ++steps;
  }
  const double e = 0.5 * (lo + hi);
  const Leg leg(g, E_min + e);
  out.bisection_steps = steps;
  out.energy = leg.E;
  out.v0 = sign * leg.speed(a);
  const double tau = leg.time(a, b);
  out.action_closed_form = leg.action(a, b, tau);

  // time grid samples; the flight time equals T to the bisection tolerance
  out.t.resize(samples + 1);
  out.q.resize(samples + 1);
  out.qdot.resize(samples + 1);
  const double h = T / static_cast<double>(samples);
  const double Fa = leg.F(a);
  double prev = a, prev2 = a;
  std::vector<double> f(samples + 1);
  for (std::size_t i = 0; i <= samples; ++i) {
    double target = tau * static_cast<double>(i) / static_cast<double>(samples);
    double q = i == 0 ? a : (i == samples ? b : invert_time(leg, Fa, target, a, b, 2 * prev - prev2));
    prev2 = prev;
    prev = q;
    double v = leg.speed(q);
    f[i] = 0.5 * v * v + Uof(q);
    out.t[i] = t_a + h * static_cast<double>(i);
    out.q[i] = sign * (q + shift);
    out.qdot[i] = sign * v;
  }
  double s = f.front() + f.back();
  for (std::size_t i = 1; i < samples; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  out.action = s * h / 3.0;
  return out;
}

ActionProfile action_profile(double g, double t0, double t2, const std::vector<double>& s_grid, Exec exec) {
  if (!(t2 > t0)) throw DomainError("action_profile: need t2 > t0");
  for (double s : s_grid)
    if (!(s > t0 && s < t2)) throw DomainError("action_profile: s outside (t0, t2)");
  ActionProfile p;
  p.s = s_grid;
  p.value.assign(s_grid.size(), 0.0);
  std::exception_ptr err;
  auto body = [&](std::size_t i) {
    try {
      double s = s_grid[i];
      p.value[i] = pendulum_bvp(g, 0.0, kPi, t0, s).action + pendulum_bvp(g, kPi, kTwoPi, s, t2).action;
    } catch (...) {
#pragma omp critical(ckam_profile_err)
      if (!err) err = std::current_exception();
    }
  };
  const long n = static_cast<long>(s_grid.size());
  if (exec == Exec::kSerial) {
    for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
    for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  }
  if (err) std::rethrow_exception(err);
  if (p.value.empty()) return p;
  p.argmin = static_cast<std::size_t>(std::min_element(p.value.begin(), p.value.end()) - p.value.begin());
  p.unimodal = true;
  for (std::size_t i = 1; i < p.value.size(); ++i) {
    double diff = p.value[i] - p.value[i - 1];
    if (i <= p.argmin && diff > 0) p.unimodal = false;
    if (i > p.argmin && diff < 0) p.unimodal = false;
  }
  const double mirror = t0 + t2, tol = 1e-9 * (t2 - t0);
  for (std::size_t i = 0; i < p.s.size(); ++i)
    for (std::size_t j = 0; j < p.s.size(); ++j)
      if (std::fabs(p.s[i] + p.s[j] - mirror) < tol)
        p.symmetry_residual = std::max(p.symmetry_residual, std::fabs(p.value[i] - p.value[j]));
  return p;
}

}  // namespace ckam
