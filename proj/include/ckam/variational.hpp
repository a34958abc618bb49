#pragma once

#include "ckam/exec.hpp"
#include "ckam/perturbation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ckam {

using Vec = std::vector<double>;

/// U(x) = c_pend (1 - cos u1) + c_v A(u1) B(u2) with u1 = <r1,x>, u2 = <r2,x>.
/// Covers the resonant-frame model (r = unit vectors), the original
/// coordinates (r = k, k'), the pure pendulum (c_v = 0) and U = 0.
class CouplingPotential {
 public:
  CouplingPotential() = default;
  CouplingPotential(std::size_t d, Vec r1, Vec r2, double c_pend, double c_v, TrigPoly A, TrigPoly B);

  static CouplingPotential zero(std::size_t d);
  static CouplingPotential pendulum(std::size_t d, double g);

  std::size_t dim() const { return d_; }
  double c_pend() const { return c_pend_; }
  double c_v() const { return c_v_; }
  bool has_coupling() const { return c_v_ != 0.0; }

  double value(const double* x) const;
  /// Pendulum part c_pend (1 - cos u1) only.
  double pendulum_part(const double* x) const;
  void gradient(const double* x, double* g) const;
  /// Row-major d x d.
  void hessian(const double* x, double* h) const;

 private:
  struct Poly1 {  // cos/sin coefficients by frequency 0..n
    std::vector<double> c, s;
    void eval(double u, int order, double* out) const;  // value and first `order` derivatives
  };
  std::size_t d_ = 0;
  Vec r1_, r2_;
  double c_pend_ = 0.0, c_v_ = 0.0;
  Poly1 A_, B_;
};

/// L(q, qdot) = scale * (1/2 sum w_i qdot_i^2 + U(q)).
struct LagrangianModel {
  std::size_t d = 2;
  Vec kinetic_weights;
  double pendulum_strength = 0.0;  // g = k_norm^-a
  double overall_scale = 1.0;      // k_norm^-2
  CouplingPotential potential;
  std::optional<StructuredV> coupling;  // v_n in (q1,q2) when built from a spec

  double L(const double* q, const double* qdot) const;
  /// 1/2 qdot_1^2 + g (1 - cos q1)
  double A_n(double q1, double q1dot) const;
  /// Remaining kinetic terms plus v_n(q1,q2).
  double B_n(const double* q, const double* qdot) const;
  void momentum(const double* q, const double* qdot, double* p) const;
  /// Legendre dual: sum p_i^2/(2 scale w_i) - scale U(q).
  double hamiltonian(const double* q, const double* p) const;

  static LagrangianModel free(std::size_t d, double scale = 1.0);
  static LagrangianModel pendulum(double g);
};

/// Model in the resonant frame q = K x (weights 1, |k|^2/|k'|^2, |k|^2/|l_i|^2).
LagrangianModel lagrangian_from(const PerturbationSpec& spec);
/// 1/2 |xdot|^2 + P_N(x) in the original coordinates.
LagrangianModel lagrangian_x(const PerturbationSpec& spec);

// ---------------------------------------------------------------------------
// Hamiltonian flows

/// H = sum y_i^2 / (2 m_i) + v_factor V(x).
struct MechanicalModel {
  Vec masses;
  CouplingPotential V;
  double v_factor = 1.0;
  double energy(const double* x, const double* y) const;
};

/// Pendulum H = y^2/2 + g (1 - cos x).
MechanicalModel pendulum_hamiltonian(double g);
/// The Legendre dual of a LagrangianModel.
MechanicalModel mechanical_from(const LagrangianModel& L);

/// General H through its partial derivatives; integrated by implicit midpoint.
struct GeneralHamiltonian {
  std::size_t d = 2;
  std::function<double(const double* x, const double* y)> H;
  std::function<void(const double* x, const double* y, double* dHdx, double* dHdy)> grad;
};

/// H = 1/2|y|^2 + <y, alpha Psi(x)>, Psi = sum (1 - cos x_i)/(2d): Psi(0) = 0,
/// 0 < Psi <= 1 elsewhere, and 1/Psi is not integrable for d = 2.
GeneralHamiltonian mane_fixture(const Vec& alpha);
/// H = 1/2 (r1 - psi(th2))^2 + 1/2 r2^2 with psi = amp sin; invariant torus r1 = psi(th2), r2 = 0.
GeneralHamiltonian arnaud_fixture(double amp = 0.5);
double arnaud_psi(double th2, double amp = 0.5);

struct Trajectory {
  Vec t;
  std::vector<Vec> x;  // lifted positions
  std::vector<Vec> y;
  double energy_drift = 0.0;  // max |H - H0| / max(|H0|, 1e-300)
  double max_speed = 0.0;     // max |dx/dt|
};

/// Stoermer-Verlet; samples every `stride` steps.
Trajectory integrate(const MechanicalModel& H, const Vec& x0, const Vec& y0, double T, double dt,
                     std::size_t stride = 1);
/// Implicit midpoint, fixed-point iteration to `tol`; IntegrationError if it stalls.
Trajectory integrate(const GeneralHamiltonian& H, const Vec& x0, const Vec& y0, double T, double dt,
                     std::size_t stride = 1, double tol = 1e-13);

struct RotationEstimate {
  Vec omega;
  double error_bar = 0.0;  // 2 max-speed / T
};

RotationEstimate rotation_vector(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Pendulum boundary value problems for L = 1/2 qdot^2 + g (1 - cos q)

struct PendulumBvp {
  double g = 0.0;
  double q_a = 0.0, q_b = 0.0, t_a = 0.0, t_b = 0.0;
  double v0 = 0.0;      // qdot(t_a)
  double energy = 0.0;  // 1/2 qdot^2 - g (1 - cos q)
  double action = 0.0;  // composite Simpson on the sampled path
  double action_closed_form = 0.0;
  Vec t, q, qdot;
  int bisection_steps = 0;
};

/// Shooting on the initial velocity with bisection. The flight time for a given
/// velocity comes from Carlson elliptic integrals, so separatrix-scale horizons
/// do not lose the exponentially small velocities.
PendulumBvp pendulum_bvp(double g, double q_a, double q_b, double t_a, double t_b,
                         std::size_t samples = 0);

struct ActionProfile {
  std::vector<double> s;
  std::vector<double> value;
  bool unimodal = false;
  std::size_t argmin = 0;
  double symmetry_residual = 0.0;  // max |L(t0 + sigma) - L(t2 - sigma)| over mirrored pairs
};

/// L(s) = action of 0 -> pi on (t0, s) plus pi -> 2pi on (s, t2).
ActionProfile action_profile(double g, double t0, double t2, const std::vector<double>& s_grid,
                             Exec exec = Exec::kParallel);

// ---------------------------------------------------------------------------
// Discrete action minimization

struct DiscretePath {
  Vec times;
  std::vector<Vec> points;
  double action = 0.0;
  double grad_norm = 0.0;  // sup-norm of the discrete Euler-Lagrange residual
  Vec rotation_estimate;
  std::vector<double> residual_history;
  int newton_iterations = 0;
};

/// Midpoint-rule discrete action sum_j h L((x_j + x_{j+1})/2, (x_{j+1} - x_j)/h).
double discrete_action(const LagrangianModel& L, const Vec& times, const std::vector<Vec>& points);
/// Gradient with respect to the interior points, divided by h (the discrete
/// Euler-Lagrange residual). Entry j-1 belongs to point j.
std::vector<Vec> discrete_gradient(const LagrangianModel& L, const Vec& times, const std::vector<Vec>& points);

struct MinimizeOptions {
  double tol = 1e-10;
  int max_newton = 200;
  double damping = 0.5;
};

/// Uniform grid of K intervals from the straight line. Damped Newton on the
/// block tridiagonal system, with a Levenberg shift on indefinite pivots and
/// steepest descent when no shift helps.
DiscretePath minimize_path(const LagrangianModel& L, const Vec& lift_start, const Vec& lift_end, double t_a,
                           double t_b, std::size_t K, const MinimizeOptions& opt = {});
/// Same, starting from a given path (endpoints taken from it).
DiscretePath minimize_path_from(const LagrangianModel& L, const Vec& times, std::vector<Vec> points,
                                const MinimizeOptions& opt = {});

/// CSV: t, q1..qd, qdot1..qdotd, action-so-far at 17 significant digits.
std::string path_csv(const LagrangianModel& L, const DiscretePath& path);

// ---------------------------------------------------------------------------
// Destruction test

enum class Verdict { kAvoids, kEnters, kInconclusive };
std::string to_string(Verdict v);

struct TrialRecord {
  double q2_start = 0.0;
  double horizon = 0.0;
  double delta_q2 = 0.0;
  double min_distance = 0.0;  // minimizer to S0 (0 when it enters)
  double action = 0.0;
  double action_through = 0.0;
  double action_detour = 0.0;  // cheaper of the two pi-shifted detours
  double action_gap = 0.0;     // detour - through
  double speed_deviation = 0.0;
  double residual = 0.0;
};

struct DestructionReport {
  double R_n = 0.0;
  double box_q1[2] = {0, 0};
  double box_q2[2] = {0, 0};
  std::size_t trials = 0;
  std::size_t K = 0;
  double min_distance_to_S0 = 0.0;
  double action_gap = 0.0;  // max over trials (the least favourable)
  double speed_deviation = 0.0;
  double speed_bound = 0.0;  // safety * |k|^{-1/3}
  double solver_tol = 0.0;
  bool in_regime = true;
  bool all_clear = false;
  bool gaps_negative = false;
  bool speed_ok = false;
  Verdict verdict = Verdict::kInconclusive;
  std::vector<TrialRecord> records;
  std::vector<std::string> notes;
};

struct DestructionOptions {
  std::size_t trials = 32;
  std::size_t K = 512;
  std::uint64_t seed = 1;
  double jitter = 0.2;
  double speed_safety = 10.0;
  double margin_factor = 10.0;  // |gap| must exceed this times the solver tolerance
  MinimizeOptions minimize;
};

/// Trials in the resonant frame of `L`. S0 = [pi - R/2, pi + R/2] x [-R/2, R/2].
DestructionReport destruction_test(const LagrangianModel& L, double R_n, double k_norm, const Vec& omega_pushed,
                                   bool in_regime, const DestructionOptions& opt = {},
                                   Exec exec = Exec::kParallel);
DestructionReport destruction_test(const PerturbationSpec& spec, const Vec& omega_pushed,
                                   const DestructionOptions& opt = {}, Exec exec = Exec::kParallel);

/// Euclidean distance from (q1, q2), reduced mod 2pi, to S0.
double distance_to_box(double q1, double q2, double R_n);
/// Minimum over the polygonal path of the torus distance to S0.
double path_distance_to_box(const std::vector<Vec>& points, double R_n);

std::string report_json(const DestructionReport& rep);

}  // namespace ckam
