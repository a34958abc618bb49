#include "ckam/error.hpp"
#include "ckam/variational.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <random>

namespace ckam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

double reduce(double u) { return u - kTwoPi * std::floor((u + kPi) / kTwoPi); }  // to [-pi, pi)

// Distance from segment a-b to the rectangle [lo1,hi1] x [lo2,hi2].
double segment_rect(const double* a, const double* b, double lo1, double hi1, double lo2, double hi2) {
  // Liang-Barsky clip: any overlap means distance 0
  double t0 = 0.0, t1 = 1.0;
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  bool hit = true;
  auto clip = [&](double p, double q) {
    if (p == 0.0) {
      if (q < 0) hit = false;
      return;
    }
    double r = q / p;
    if (p < 0) t0 = std::max(t0, r);
    else t1 = std::min(t1, r);
  };
  clip(-dx, a[0] - lo1);
  clip(dx, hi1 - a[0]);
  clip(-dy, a[1] - lo2);
  clip(dy, hi2 - a[1]);
  if (hit && t0 <= t1) return 0.0;

  auto point_rect = [&](double x, double y) {
    double ex = std::max({lo1 - x, 0.0, x - hi1}), ey = std::max({lo2 - y, 0.0, y - hi2});
    return std::hypot(ex, ey);
  };
  auto point_seg = [&](double x, double y) {
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? std::clamp(((x - a[0]) * dx + (y - a[1]) * dy) / len2, 0.0, 1.0) : 0.0;
    return std::hypot(a[0] + t * dx - x, a[1] + t * dy - y);
  };
  double best = std::min(point_rect(a[0], a[1]), point_rect(b[0], b[1]));
  for (double x : {lo1, hi1})
    for (double y : {lo2, hi2}) best = std::min(best, point_seg(x, y));
  return best;
}

struct TrialSetup {
  double q2 = 0.0, T = 0.0, delta2 = 0.0;
  long wind = 0;  // the straight line meets (pi, 2 pi wind) at T/2
};

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kAvoids: return "avoids";
    case Verdict::kEnters: return "enters";
    default: return "inconclusive";
  }
}

double distance_to_box(double q1, double q2, double R_n) {
  const double ex = std::max(0.0, std::fabs(reduce(q1 - kPi)) - 0.5 * R_n);
  const double ey = std::max(0.0, std::fabs(reduce(q2)) - 0.5 * R_n);
  return std::hypot(ex, ey);
}

double path_distance_to_box(const std::vector<Vec>& points, double R_n) {
  if (points.empty()) throw DomainError("path_distance_to_box: empty path");
  double best = distance_to_box(points[0][0], points[0][1], R_n);
  for (std::size_t j = 0; j + 1 < points.size(); ++j) {
    const double a[2] = {points[j][0], points[j][1]}, b[2] = {points[j + 1][0], points[j + 1][1]};
    const auto m1lo = static_cast<long>(std::floor((std::min(a[0], b[0]) - kPi) / kTwoPi));
    const auto m1hi = static_cast<long>(std::ceil((std::max(a[0], b[0]) - kPi) / kTwoPi));
    const auto m2lo = static_cast<long>(std::floor(std::min(a[1], b[1]) / kTwoPi));
    const auto m2hi = static_cast<long>(std::ceil(std::max(a[1], b[1]) / kTwoPi));
    for (long m1 = m1lo; m1 <= m1hi; ++m1)
      for (long m2 = m2lo; m2 <= m2hi; ++m2) {
        const double c1 = kPi + kTwoPi * static_cast<double>(m1), c2 = kTwoPi * static_cast<double>(m2);
        best = std::min(best, segment_rect(a, b, c1 - 0.5 * R_n, c1 + 0.5 * R_n, c2 - 0.5 * R_n, c2 + 0.5 * R_n));
      }
    if (best == 0.0) return 0.0;
  }
  return best;
}

DestructionReport destruction_test(const LagrangianModel& L, double R_n, double k_norm, const Vec& omega_pushed,
                                   bool in_regime, const DestructionOptions& opt, Exec exec) {
  const std::size_t d = L.d;
  if (d < 2 || omega_pushed.size() != d) throw DomainError("destruction_test: need d >= 2 and matching omega");
  if (!(R_n > 0.0) || !(k_norm > 0.0)) throw DomainError("destruction_test: need R_n > 0 and |k| > 0");
  if (omega_pushed[0] == 0.0) throw DomainError("destruction_test: omega'_1 = 0 (exact resonance)");
  if (opt.trials == 0) throw DomainError("destruction_test: trials must be >= 1");
  if (opt.K < 32 || opt.K % 2) throw DomainError("destruction_test: K must be even and >= 32");

  DestructionReport rep;
  rep.R_n = R_n;
  rep.box_q1[0] = kPi - 0.5 * R_n;
  rep.box_q1[1] = kPi + 0.5 * R_n;
  rep.box_q2[0] = -0.5 * R_n;
  rep.box_q2[1] = 0.5 * R_n;
  rep.trials = opt.trials;
  rep.K = opt.K;
  rep.in_regime = in_regime;
  rep.speed_bound = opt.speed_safety * std::pow(k_norm, -1.0 / 3.0);

  const double w1 = omega_pushed[0], w2 = omega_pushed[1];
  const double s1 = w1 > 0 ? 1.0 : -1.0;
  const double T0 = kTwoPi / std::fabs(w1);

  // trial endpoints: stratified q2(t0), jittered horizon; drawn serially so the
  // set does not depend on the thread count
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<TrialSetup> setup(opt.trials);
  for (std::size_t i = 0; i < opt.trials; ++i) {
    auto& s = setup[i];
    s.q2 = -kPi + kTwoPi * (static_cast<double>(i) + U(rng)) / static_cast<double>(opt.trials);
    s.T = T0 * (1.0 + opt.jitter * (2.0 * U(rng) - 1.0));
    s.wind = std::lround((s.q2 + 0.5 * w2 * s.T) / kTwoPi);
    s.delta2 = 2.0 * (kTwoPi * static_cast<double>(s.wind) - s.q2);
  }

  rep.records.resize(opt.trials);
  std::vector<std::exception_ptr> errors(opt.trials);
  const std::size_t half = opt.K / 2;
  auto run = [&](std::size_t i) {
    try {
      const auto& s = setup[i];
      auto endpoint = [&](double shift, double f) {
        Vec p(d);
        p[0] = s1 * kTwoPi * f;
        p[1] = s.q2 + shift + f * s.delta2;
        for (std::size_t k = 2; k < d; ++k) p[k] = f * omega_pushed[k] * s.T;
        return p;
      };
      auto& rec = rep.records[i];
      rec.q2_start = s.q2;
      rec.horizon = s.T;
      rec.delta_q2 = s.delta2;

      auto P = minimize_path(L, endpoint(0, 0), endpoint(0, 1), 0.0, s.T, opt.K, opt.minimize);
      rec.action = P.action;
      rec.residual = P.grad_norm;
      rec.min_distance = path_distance_to_box(P.points, R_n);
      const double mean = s.delta2 / s.T;
      for (std::size_t j = 0; j + 1 < P.points.size(); ++j) {
        double v = (P.points[j + 1][1] - P.points[j][1]) / (P.times[j + 1] - P.times[j]);
        rec.speed_deviation = std::max(rec.speed_deviation, std::fabs(v - mean));
      }

      // forced comparison: the same q2 motion through the centre of S0 and
      // shifted by +-pi in q2 through the detour points
      auto pinned = [&](double shift) {
        Vec a = endpoint(shift, 0), m = endpoint(shift, 0.5), b = endpoint(shift, 1);
        auto first = minimize_path(L, a, m, 0.0, 0.5 * s.T, half, opt.minimize);
        auto second = minimize_path(L, m, b, 0.5 * s.T, s.T, half, opt.minimize);
        rec.residual = std::max({rec.residual, first.grad_norm, second.grad_norm});
        return first.action + second.action;
      };
      rec.action_through = pinned(0.0);
      rec.action_detour = std::min(pinned(kPi), pinned(-kPi));
      rec.action_gap = rec.action_detour - rec.action_through;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const long n = static_cast<long>(opt.trials);
  if (exec == Exec::kSerial) {
    for (long i = 0; i < n; ++i) run(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
    for (long i = 0; i < n; ++i) run(static_cast<std::size_t>(i));
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // action resolution: residual tolerance over the horizon, or rounding in S
  double smax = 0.0, tmax = 0.0;
  rep.min_distance_to_S0 = std::numeric_limits<double>::infinity();
  rep.action_gap = -std::numeric_limits<double>::infinity();
  for (const auto& r : rep.records) {
    smax = std::max(smax, std::fabs(r.action_through));
    tmax = std::max(tmax, r.horizon);
    rep.min_distance_to_S0 = std::min(rep.min_distance_to_S0, r.min_distance);
    rep.action_gap = std::max(rep.action_gap, r.action_gap);
    rep.speed_deviation = std::max(rep.speed_deviation, r.speed_deviation);
  }
  rep.solver_tol = std::max(opt.minimize.tol * tmax, 64.0 * std::numeric_limits<double>::epsilon() * smax);
  rep.all_clear = rep.min_distance_to_S0 > 0.0;
  rep.gaps_negative = rep.action_gap < -opt.margin_factor * rep.solver_tol;
  rep.speed_ok = rep.speed_deviation <= rep.speed_bound;

  if (!in_regime) {
    rep.verdict = Verdict::kInconclusive;
    rep.notes.push_back("frame out of regime");
  } else if (rep.all_clear && rep.gaps_negative) {
    rep.verdict = Verdict::kAvoids;
  } else if (!rep.all_clear) {
    rep.verdict = Verdict::kEnters;
  } else {
    rep.verdict = Verdict::kInconclusive;
    rep.notes.push_back("minimizers clear S0 but the forced comparison is not resolved");
  }
  if (!rep.gaps_negative) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "largest action gap %.3g vs resolution %.3g", rep.action_gap, rep.solver_tol);
    rep.notes.push_back(buf);
  }
  if (!rep.speed_ok) rep.notes.push_back("speed deviation above the bound");
  return rep;
}

DestructionReport destruction_test(const PerturbationSpec& spec, const Vec& omega_pushed,
                                   const DestructionOptions& opt, Exec exec) {
  const auto& w = spec.params.warnings;
  const bool in_regime = std::find(w.begin(), w.end(), "pushforward out of regime") == w.end();
  return destruction_test(lagrangian_from(spec), spec.params.R_n, spec.params.k_norm, omega_pushed, in_regime,
                          opt, exec);
}

std::string report_json(const DestructionReport& rep) {
  nlohmann::json j;
  j["verdict"] = to_string(rep.verdict);
  j["R_n"] = rep.R_n;
  j["S0"] = {{"q1", {rep.box_q1[0], rep.box_q1[1]}}, {"q2", {rep.box_q2[0], rep.box_q2[1]}}};
  j["trials"] = rep.trials;
  j["K"] = rep.K;
  j["min_distance_to_S0"] = rep.min_distance_to_S0;
  j["action_gap"] = rep.action_gap;
  j["solver_tol"] = rep.solver_tol;
  j["speed_deviation"] = rep.speed_deviation;
  j["speed_bound"] = rep.speed_bound;
  j["in_regime"] = rep.in_regime;
  j["all_clear"] = rep.all_clear;
  j["gaps_negative"] = rep.gaps_negative;
  j["speed_ok"] = rep.speed_ok;
  j["notes"] = rep.notes;
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : rep.records)
    recs.push_back({{"q2_start", r.q2_start},
                    {"horizon", r.horizon},
                    {"delta_q2", r.delta_q2},
                    {"min_distance", r.min_distance},
                    {"action", r.action},
                    {"action_through", r.action_through},
                    {"action_detour", r.action_detour},
                    {"action_gap", r.action_gap},
                    {"speed_deviation", r.speed_deviation},
                    {"residual", r.residual}});
  return j.dump(2);
}

}  // namespace ckam
