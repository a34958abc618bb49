#pragma once

#include "ckam/diophantine.hpp"
#include "ckam/exec.hpp"
#include "ckam/resonance_frame.hpp"
#include "ckam/trigpoly.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ckam {

enum class ThresholdPolicy { kEnforce, kRecord };

/// Multipliers for the implied constants (all 1 by default) and desk-scale knobs.
struct PerturbationConfig {
  double alpha = 2.0;
  int kappa_cap = 40;
  double R_scale = 1.0;
  double M_scale = 1.0;
  double mu_max = 0.25;  // "mu_n << 1" at desk scale
  ThresholdPolicy policy = ThresholdPolicy::kEnforce;
  /// Grid points per unit of degree for sup estimates of the factors.
  std::size_t oversample = 8;
};

struct PerturbationParams {
  std::size_t d = 2;
  double tau = 0.0;
  double eps_exp = 0.1;
  double eps_size = 0.0;
  double a = 0.0;   // 2d + 2tau - 2 - eps_exp
  double s0 = 0.0;  // 2d + 2tau
  double alpha = 2.0;
  int kappa = 2;
  bool kappa_capped = false;
  double k_norm = 0.0;
  double k_prime_norm = 0.0;
  double omega1 = 0.0;
  double R_n = 0.0;
  long M = 1;
  /// Degree of the one-variable Jackson factor: the largest D keeping every
  /// frequency of P_N inside the (2M+1)|k| budget.
  long jackson_degree = 1;
  double N_budget = 0.0;  // (2M+1) k_norm
  double r_pred = 0.0;
  double predicted_k_norm = 0.0;   // eps_size^{-1/(2d+2tau-eps-r)}
  double predicted_N_budget = 0.0; // eps_size^{-(d+tau+1)/(2d+2tau-r)}
  std::vector<std::string> warnings;
};

/// Threshold measurements of the Jackson factor T(q1,q2) = g(q1-pi) g(q2).
struct ThresholdReport {
  double T_peak = 0.0;       // T(pi, 0)
  double T_max = 0.0;        // max T
  double mu_measured = 0.0;  // max of T off supp phi_n
  double mu_formula = 0.0;   // M^-kappa ||phi_n||_{C^kappa}
  double mu_alpha = 0.0;     // |omega1|^alpha
  bool mu_disagree = false;  // formula and alpha law differ by more than 10x
  bool peak_ok = false;
  bool mu_ok = false;
  double localization = 0.0;        // max of v_n off the 1.5x dilated box
  double localization_bound = 0.0;  // 4 mu^2 M^-2s0 k^-a
  bool passed() const { return peak_ok && mu_ok; }
};

/// v_n(q1,q2) = v_scale A(q1) B(q2) with A = (1 - cos q1) g(q1 - pi)^2, B = g(q2)^2.
struct StructuredV {
  TrigPoly g{1};
  TrigPoly A{1};
  TrigPoly B{1};
  double v_scale = 0.0;
  ThresholdReport thresholds;

  double operator()(double q1, double q2) const { return v_scale * A(q1) * B(q2); }
  /// Termwise expansion into a 2-variable polynomial.
  TrigPoly expand() const;
};

struct PerturbationSpec {
  PerturbationParams params;
  ResonanceFrame frame;
  StructuredV v;
  double pend_scale = 0.0;  // k_norm^{-(a+2)}
  double v_weight = 0.0;    // k_norm^{-2}
  long long N_squared = 0;  // max |m1 k + m2 k'|^2 over the frequencies present
  std::optional<TrigPoly> v_n;  // 2 variables
  std::optional<TrigPoly> P_N;  // d variables
  std::map<double, NormReport> norm_table;

  double degree() const;
  /// (q1, q2) = (<k,x>, <k',x>)
  double operator()(const double* x) const;
  double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }
  bool within_budget() const;
};

PerturbationParams plan_parameters(std::size_t d, double tau, double eps_exp, double eps_size,
                                   const FrequencyVector& omega_pushed, double k_norm,
                                   const PerturbationConfig& config = {}, double r = 0.0,
                                   std::optional<double> k_prime_norm = std::nullopt);

StructuredV build_v_structured(const PerturbationParams& params, const PerturbationConfig& config = {});
/// Expanded 2-variable v_n.
TrigPoly build_v(const PerturbationParams& params, const PerturbationConfig& config = {});

/// Substitutes q1 = <k,x>, q2 = <k',x>; `expand` also builds the d-variable P_N.
PerturbationSpec assemble_P(const PerturbationParams& params, const ResonanceFrame& frame,
                            const PerturbationConfig& config = {}, bool expand = true);

/// Frame, pushforward and parameters for k, then assemble_P.
PerturbationSpec build_perturbation(const IntVec& k, const FrequencyVector& omega, double tau,
                                    double eps_exp, double eps_size,
                                    const PerturbationConfig& config = {}, bool expand = true);

/// C^r norm of P_N in x for integer r from the factor tables: D_x^alpha P is a
/// short sum of separable terms in (q1,q2), and x -> q covers the 2-torus.
NormReport structured_norm(const PerturbationSpec& spec, int r, Exec exec = Exec::kParallel);
/// Bernstein check of P_N in x coordinates using the same tables.
BernsteinReport structured_bernstein(const PerturbationSpec& spec, int s, Exec exec = Exec::kParallel);

/// Uses the expanded P_N when present, else structured_norm (integer r only).
NormReport perturbation_norm(const PerturbationSpec& spec, double r, Exec exec = Exec::kParallel);

struct ScalingRow {
  IntVec k;
  double k_norm = 0.0;
  double omega1 = 0.0;
  long M = 0;
  long jackson_degree = 0;
  double N = 0.0;
  double N_budget = 0.0;
  bool thresholds_ok = false;
  std::map<double, double> norms;  // r -> ||P_N||_{C^r}
};

struct ScalingFit {
  double r = 0.0;
  double slope = 0.0;
  double predicted = 0.0;  // -(2d + 2tau - eps - r)
  double rel_dev = 0.0;
  double N_exponent = 0.0;            // fitted d ln N / d ln ||P||_{C^r}
  double N_exponent_predicted = 0.0;  // -(d + tau + 1)/(2d + 2tau - r)
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<ScalingFit> fits;
};

ScalingReport norm_scaling_report(const FrequencyVector& omega, double tau, double eps_exp,
                                  const std::vector<double>& r_list,
                                  const std::vector<IntVec>& k_sequence,
                                  PerturbationConfig config = {}, Exec exec = Exec::kParallel);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string spec_to_json(const PerturbationSpec& spec);
PerturbationSpec spec_from_json(const std::string& text);

}  // namespace ckam
