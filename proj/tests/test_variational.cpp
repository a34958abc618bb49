#include "ckam/error.hpp"
#include "ckam/resonance_frame.hpp"
#include "ckam/variational.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

using namespace ckam;

namespace {

constexpr double kPi = std::numbers::pi;

const PerturbationSpec& golden_spec() {
  static const PerturbationSpec s = [] {
    PerturbationConfig c;
    c.policy = ThresholdPolicy::kRecord;
    return build_perturbation({-3, 5}, FrequencyVector::golden(), 0.0, 0.1, 0.0, c, false);
  }();
  return s;
}

Vec golden_pushed() {
  auto pf = pushforward(golden_spec().frame, FrequencyVector::golden(), 0.0);
  return {pf.omega_new[0].to_double(), pf.omega_new[1].to_double()};
}

// A potential with visible coupling, for derivative checks.
CouplingPotential test_potential() {
  auto A = TrigPoly::from_terms(1, {{{0}, 0.3, 0.0}, {{1}, -0.2, 0.4}, {{3}, 0.1, -0.05}});
  auto B = TrigPoly::from_terms(1, {{{0}, 1.0, 0.0}, {{2}, 0.5, 0.25}});
  return CouplingPotential(3, {-3, 5, 1}, {5, 3, 0}, 0.7, 1.3, A, B);
}

// Independent RK4 for qdot = v, vdot = g sin q; returns (q(T), trapezoid action).
std::pair<double, double> rk4_pendulum(double g, double q, double v, double T, int n) {
  const double h = T / n;
  auto lag = [g](double q, double v) { return 0.5 * v * v + g * (1 - std::cos(q)); };
  double S = 0.5 * lag(q, v);
  for (int i = 0; i < n; ++i) {
    double k1q = v, k1v = g * std::sin(q);
    double k2q = v + 0.5 * h * k1v, k2v = g * std::sin(q + 0.5 * h * k1q);
    double k3q = v + 0.5 * h * k2v, k3v = g * std::sin(q + 0.5 * h * k2q);
    double k4q = v + h * k3v, k4v = g * std::sin(q + h * k3q);
    q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    S += (i + 1 == n ? 0.5 : 1.0) * lag(q, v);
  }
  return {q, S * h};
}

}  // namespace

TEST_CASE("coupling potential derivatives") {
  auto U = test_potential();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const double e = 1e-6;
  for (int t = 0; t < 10; ++t) {
    double x[3] = {u(rng), u(rng), u(rng)}, g[3], H[9];
    U.gradient(x, g);
    U.hessian(x, H);
    for (int i = 0; i < 3; ++i) {
      double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
      xp[i] += e;
      xm[i] -= e;
      CHECK(g[i] == doctest::Approx((U.value(xp) - U.value(xm)) / (2 * e)).epsilon(1e-6).scale(10));
      double gp[3], gm[3];
      U.gradient(xp, gp);
      U.gradient(xm, gm);
      for (int j = 0; j < 3; ++j)
        CHECK(H[i * 3 + j] == doctest::Approx((gp[j] - gm[j]) / (2 * e)).epsilon(1e-6).scale(100));
    }
  }
  auto Z = CouplingPotential::zero(2);
  double x[2] = {0.3, 1.1};
  CHECK(Z.value(x) == 0.0);
}

TEST_CASE("lagrangian from the golden build") {
  const auto& s = golden_spec();
  auto L = lagrangian_from(s);
  REQUIRE(L.d == 2);
  CHECK(L.kinetic_weights[0] == 1.0);
  CHECK(L.kinetic_weights[1] == 1.0);  // |k'| = |k|
  CHECK(L.overall_scale == doctest::Approx(1.0 / 34));
  CHECK(L.pendulum_strength == doctest::Approx(std::pow(34.0, -0.95)));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int t = 0; t < 20; ++t) {
    double q[2] = {u(rng), u(rng)}, v[2] = {u(rng), 5 * u(rng)}, p[2];
    // the A/B split
    CHECK(L.L(q, v) == doctest::Approx(L.overall_scale * (L.A_n(q[0], v[0]) + L.B_n(q, v))).epsilon(1e-14));
    // Legendre: H(q, dL/dv) + L(q, v) = <p, v>
    L.momentum(q, v, p);
    CHECK(L.hamiltonian(q, p) + L.L(q, v) == doctest::Approx(p[0] * v[0] + p[1] * v[1]).epsilon(1e-13));
    auto M = mechanical_from(L);
    CHECK(M.energy(q, p) == doctest::Approx(L.hamiltonian(q, p)).epsilon(1e-14));
  }
}

TEST_CASE("change of variables preserves the discrete action") {
  const auto& s = golden_spec();
  auto Lq = lagrangian_from(s);
  auto Lx = lagrangian_x(s);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int c = 0; c < 5; ++c) {
    Vec t;
    std::vector<Vec> xs, qs;
    double a0 = u(rng), a1 = u(rng), b0 = 3 * u(rng), b1 = 3 * u(rng);
    for (int j = 0; j <= 400; ++j) {
      double tt = 0.05 * j;
      Vec x{a0 + b0 * tt + 0.3 * std::sin(tt), a1 + b1 * tt - 0.2 * std::cos(2 * tt)};
      t.push_back(tt);
      xs.push_back(x);
      qs.push_back({-3 * x[0] + 5 * x[1], 5 * x[0] + 3 * x[1]});
    }
    double Sx = discrete_action(Lx, t, xs), Sq = discrete_action(Lq, t, qs);
    CHECK(Sx == doctest::Approx(Sq).epsilon(1e-12));
  }
}

TEST_CASE("symplectic integration") {
  auto pend = pendulum_hamiltonian(1.0);
  auto tr = integrate(pend, {1.0}, {0.0}, 100.0, 1e-3, 1000);
  CHECK(tr.energy_drift < 1e-6);
  // second order: halving dt quarters the drift
  auto coarse = integrate(pend, {1.0}, {0.0}, 20.0, 4e-3, 1000);
  auto fine = integrate(pend, {1.0}, {0.0}, 20.0, 2e-3, 1000);
  CHECK(coarse.energy_drift / fine.energy_drift == doctest::Approx(4.0).epsilon(0.1));

  // rotating pendulum: mean speed 2 pi / period
  const double E = 3.0, g = 1.0;  // H = y^2/2 + (1 - cos x) = 3 > 2g
  double period = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = 2 * kPi * (i + 0.5) / n;
    period += (2 * kPi / n) / std::sqrt(2 * (E - g * (1 - std::cos(x))));
  }
  const double mean_speed = 2 * kPi / period;
  double bar_prev = 0;
  for (double T : {50.0, 100.0}) {
    auto r = integrate(pend, {0.0}, {std::sqrt(2 * E)}, T, 1e-3, 100);
    auto rv = rotation_vector(r);
    CHECK(std::fabs(rv.omega[0] - mean_speed) < 2.0 / T);
    CHECK(std::fabs(rv.omega[0] - mean_speed) <= rv.error_bar);
    if (bar_prev > 0) CHECK(rv.error_bar == doctest::Approx(bar_prev / 2).epsilon(1e-3));
    bar_prev = rv.error_bar;
  }

  // Mane fixture: the zero section is invariant
  auto mane = mane_fixture({1.0, kPi - 2.5});
  auto m = integrate(mane, {0.5, -1.0}, {0.0, 0.0}, 20.0, 1e-2, 100);
  for (const auto& y : m.y) CHECK(std::fabs(y[0]) + std::fabs(y[1]) < 1e-14);
  CHECK(m.x.back()[0] != m.x.front()[0]);

  // the torus r1 = psi(th2), r2 = 0 consists of fixed points
  auto ar = arnaud_fixture(0.5);
  for (double th2 : {0.3, 1.7, -2.2}) {
    auto a = integrate(ar, {0.1, th2}, {arnaud_psi(th2), 0.0}, 100.0, 1e-2, 1000);
    for (std::size_t i = 0; i < a.t.size(); ++i) {
      CHECK(std::fabs(a.y[i][0] - arnaud_psi(a.x[i][1])) < 1e-8);
      CHECK(std::fabs(a.y[i][1]) < 1e-8);
    }
  }

  // fixed point iteration stalls on a stiff step
  GeneralHamiltonian stiff;
  stiff.d = 1;
  stiff.H = [](const double* x, const double* y) { return 0.5 * y[0] * y[0] + 50 * (1 - std::cos(x[0])); };
  stiff.grad = [](const double* x, const double* y, double* hx, double* hy) {
    hx[0] = 50 * std::sin(x[0]);
    hy[0] = y[0];
  };
  CHECK_THROWS_AS(integrate(stiff, {2.0}, {0.0}, 10.0, 1.0), IntegrationError);
  CHECK_THROWS_AS(integrate(pend, {0.0, 1.0}, {0.0}, 1.0, 1e-3), DomainError);
}

TEST_CASE("pendulum boundary value problem") {
  auto b = pendulum_bvp(1.0, 0.0, 2 * kPi, 0.0, 40.0);
  CHECK(std::fabs(b.action - 8.0) < 1e-4);
  CHECK(b.action == doctest::Approx(b.action_closed_form).epsilon(1e-12));
  CHECK(b.q.front() == 0.0);
  CHECK(b.q.back() == doctest::Approx(2 * kPi).epsilon(1e-15));
  // energy along the samples
  for (std::size_t i = 0; i < b.q.size(); i += 97)
    CHECK(0.5 * b.qdot[i] * b.qdot[i] - (1 - std::cos(b.q[i])) == doctest::Approx(b.energy).scale(1.0).epsilon(1e-8));
  // the samples solve qddot = g sin q
  const double h = b.t[1] - b.t[0];
  for (std::size_t i = 1; i + 1 < b.q.size(); i += 101) {
    double acc = (b.q[i + 1] - 2 * b.q[i] + b.q[i - 1]) / (h * h);
    CHECK(acc == doctest::Approx(std::sin(b.q[i])).scale(1.0).epsilon(1e-4));  // O(h^2) differences
  }

  // independent shooting oracle on a moderate horizon
  for (auto [g, qa, qb, T] : {std::tuple{1.0, 0.0, 2 * kPi, 10.0}, std::tuple{0.3, 0.5, 2.5, 4.0},
                              std::tuple{2.0, kPi, 2 * kPi, 6.0}}) {
    auto s = pendulum_bvp(g, qa, qb, 0.0, T);
    auto [qT, S] = rk4_pendulum(g, qa, s.v0, T, 200000);
    CHECK(qT == doctest::Approx(qb).epsilon(1e-7));
    CHECK(s.action == doctest::Approx(S).epsilon(1e-8));
  }

  // direction reversal and lifts
  auto fwd = pendulum_bvp(0.5, 0.0, kPi, 0.0, 7.0);
  auto rev = pendulum_bvp(0.5, 0.0, -kPi, 0.0, 7.0);
  auto lift = pendulum_bvp(0.5, 4 * kPi, 5 * kPi, 0.0, 7.0);
  CHECK(rev.action == doctest::Approx(fwd.action).epsilon(1e-12));
  CHECK(rev.v0 == doctest::Approx(-fwd.v0).epsilon(1e-12));
  CHECK(lift.action == doctest::Approx(fwd.action).epsilon(1e-12));

  // separatrix value 8 sqrt(g)
  CHECK(pendulum_bvp(0.25, 0.0, 2 * kPi, 0.0, 120.0).action == doctest::Approx(4.0).epsilon(1e-9));

  // no monotone solution reaches 1.0 from 0.5 this slowly
  try {
    pendulum_bvp(1.0, 0.5, 1.0, 0.0, 100.0);
    FAIL("expected BvpError");
  } catch (const BvpError& e) {
    CHECK_FALSE(e.velocity_scan.empty());
  }
  CHECK_THROWS_AS(pendulum_bvp(1.0, 0.0, 7.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(pendulum_bvp(1.0, 0.0, 1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("action profile") {
  std::vector<double> s;
  for (int i = 1; i < 40; ++i) s.push_back(20.0 * i / 40);
  auto p = action_profile(1.0, 0.0, 20.0, s);
  CHECK(p.unimodal);
  CHECK(p.symmetry_residual < 1e-8);
  CHECK(p.s[p.argmin] == doctest::Approx(10.0).epsilon(0.03));
  auto ps = action_profile(1.0, 0.0, 20.0, {5.0, 10.0, 15.0}, Exec::kSerial);
  CHECK(ps.value[1] == p.value[19]);

  // slower traversal flattens the profile
  double prev = 1e300;
  for (double T : {12.0, 16.0, 20.0}) {
    auto q = action_profile(1.0, 0.0, T, {0.5 * T, 0.5 * T + 1.0});
    double diff = std::fabs(q.value[1] - q.value[0]);
    CHECK(diff < prev);
    prev = diff;
  }
  CHECK_THROWS_AS(action_profile(1.0, 0.0, 20.0, {25.0}), DomainError);
}

TEST_CASE("discrete minimization") {
  // gradient against finite differences of the discrete action
  auto L = LagrangianModel::pendulum(0.7);
  Vec t;
  std::vector<Vec> x;
  for (int j = 0; j <= 20; ++j) {
    t.push_back(0.25 * j);
    x.push_back({0.3 * j + 0.2 * std::sin(j)});
  }
  auto G = discrete_gradient(L, t, x);
  for (std::size_t j = 1; j < 20; ++j) {
    auto xp = x, xm = x;
    xp[j][0] += 1e-6;
    xm[j][0] -= 1e-6;
    double fd = (discrete_action(L, t, xp) - discrete_action(L, t, xm)) / 2e-6 / 0.25;
    CHECK(G[j - 1][0] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }

  // cross-validation against shooting
  auto P = minimize_path(L, {0.0}, {2 * kPi}, 0.0, 20.0, 4000);
  auto b = pendulum_bvp(0.7, 0.0, 2 * kPi, 0.0, 20.0);
  CHECK(P.grad_norm < 1e-10);
  CHECK(P.action == doctest::Approx(b.action).epsilon(1e-6));
  CHECK(P.action >= b.action - 1e-6);
  CHECK(P.rotation_estimate[0] == doctest::Approx(2 * kPi / 20));

  // free motion: the straight line is already stationary
  auto F = minimize_path(LagrangianModel::free(2, 2.0), {0.0, 1.0}, {3.0, -1.0}, 0.0, 2.0, 16);
  CHECK(F.newton_iterations == 0);
  CHECK(F.action == doctest::Approx(2.0 * 0.5 * (9.0 + 4.0) / 2.0));

  MinimizeOptions none;
  none.max_newton = 0;
  try {
    minimize_path(L, {0.0}, {2 * kPi}, 0.0, 20.0, 64, none);
    FAIL("expected MinimizationError");
  } catch (const MinimizationError& e) {
    CHECK(e.residual_history.size() == 1);
  }
  CHECK_THROWS_AS(minimize_path(L, {0.0}, {1.0}, 0.0, 1.0, 8), DomainError);

  auto csv = path_csv(L, P);
  CHECK(csv.rfind("t,q1,qdot1,action\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4002);
}

TEST_CASE("distance to S0") {
  const double R = 0.1;
  CHECK(distance_to_box(kPi, 0.0, R) == 0.0);
  CHECK(distance_to_box(kPi + 2 * kPi, -4 * kPi, R) == 0.0);
  CHECK(distance_to_box(kPi + 0.15, 0.0, R) == doctest::Approx(0.1));
  CHECK(distance_to_box(kPi, 0.05 + 0.3, R) == doctest::Approx(0.3));
  // a segment jumping over the box still hits it
  CHECK(path_distance_to_box({{kPi, -1.0}, {kPi, 1.0}}, R) == 0.0);
  CHECK(path_distance_to_box({{kPi - 1, 0.2}, {kPi + 1, 0.2}}, R) == doctest::Approx(0.15));
  CHECK(path_distance_to_box({{3 * kPi - 1, 0.2 + 2 * kPi}, {3 * kPi + 1, 0.2 + 2 * kPi}}, R) ==
        doctest::Approx(0.15));
}

TEST_CASE("destruction test mechanics") {
  const auto& s = golden_spec();
  auto w = golden_pushed();
  DestructionOptions o;
  o.trials = 4;
  o.K = 256;

  // integrable fixture: minimizers run straight through S0 and the gap vanishes
  auto free = LagrangianModel::free(2, 1.0 / 34);
  auto r0 = destruction_test(free, s.params.R_n, s.params.k_norm, w, true, o);
  CHECK(r0.verdict == Verdict::kEnters);
  CHECK(std::fabs(r0.action_gap) < r0.solver_tol);
  CHECK(r0.min_distance_to_S0 == 0.0);
  CHECK(r0.speed_ok);

  auto rs = destruction_test(s, w, o, Exec::kSerial);
  auto rp = destruction_test(s, w, o, Exec::kParallel);
  REQUIRE(rs.records.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rs.records[i].action == rp.records[i].action);
    CHECK(rs.records[i].action_gap == rp.records[i].action_gap);
    CHECK(rs.records[i].residual < 1e-10);
  }
  CHECK(rs.in_regime);
  CHECK(rs.speed_ok);
  CHECK(rs.box_q1[1] - rs.box_q1[0] == doctest::Approx(s.params.R_n));
  // stratified starts and bounded horizons
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rs.records[i].q2_start >= -kPi + 2 * kPi * i / 4);
    CHECK(rs.records[i].q2_start < -kPi + 2 * kPi * (i + 1) / 4);
    CHECK(std::fabs(rs.records[i].horizon * w[0] / (2 * kPi) - 1) <= 0.2 + 1e-12);
  }

  auto out = destruction_test(free, s.params.R_n, s.params.k_norm, w, false, o);
  CHECK(out.verdict == Verdict::kInconclusive);
  CHECK(report_json(rs).find("\"verdict\"") != std::string::npos);
  o.K = 30;
  CHECK_THROWS_AS(destruction_test(s, w, o), DomainError);
}
