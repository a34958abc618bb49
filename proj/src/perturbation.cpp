#include "ckam/perturbation.hpp"

#include "ckam/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>

namespace ckam {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t pow2_at_least(double need) {
  std::size_t n = 1;
  while (static_cast<double>(n) < need) n <<= 1;
  return n;
}

TrigPoly one_minus_cos() { return TrigPoly::from_terms(1, {{{0}, 1.0, 0.0}, {{1}, -1.0, 0.0}}); }

// Torus distance of 2pi i / n from 0.
double torus_dist(std::size_t i, std::size_t n) {
  std::size_t m = std::min(i, n - i);
  return kTwoPi * static_cast<double>(m) / static_cast<double>(n);
}

// sup |b^{(j)}| of the unit-width bump, j = 0..order, on a fine grid of (-1, 1).
std::vector<long double> unit_bump_sups(int order) {
  auto b = bump(1.0);
  std::vector<long double> s(static_cast<std::size_t>(order) + 1, 0.0L);
  const int n = 20000;
  for (int i = 1; i < n; ++i) {
    auto j = b.jet(-1.0 + 2.0 * i / n, order);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::max(s[k], static_cast<long double>(std::fabs(j[k])));
  }
  return s;
}

// M^-kappa ||phi_n||_{C^kappa} for phi_n(q1,q2) = b_R(q1-pi) b_R(q2): the sup of
// a product of one-variable factors is the product of their sups.
double mu_formula(double R, long M, int kappa) {
  auto sig = unit_bump_sups(kappa);
  std::vector<long double> s(sig.size());
  for (std::size_t j = 0; j < s.size(); ++j)
    s[j] = sig[j] * std::pow(static_cast<long double>(R), -static_cast<long double>(j));
  long double total = 0.0L;
  for (int a = 0; a <= kappa; ++a)
    for (int b = 0; a + b <= kappa; ++b) total += s[static_cast<std::size_t>(a)] * s[static_cast<std::size_t>(b)];
  long double v = total * std::pow(static_cast<long double>(M), -static_cast<long double>(kappa));
  return v > static_cast<long double>(std::numeric_limits<double>::max())
             ? std::numeric_limits<double>::infinity()
             : static_cast<double>(v);
}

// Coefficients c_j of prod_i (k_i X + k'_i Y)^{alpha_i}, c_j multiplying X^j Y^{s-j}.
std::vector<double> chain_coefficients(const IntVec& k, const IntVec& kp, const std::vector<int>& alpha) {
  std::vector<double> c{1.0};
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (int r = 0; r < alpha[i]; ++r) {
      std::vector<double> n(c.size() + 1, 0.0);
      for (std::size_t j = 0; j < c.size(); ++j) {
        n[j + 1] += c[j] * static_cast<double>(k[i]);
        n[j] += c[j] * static_cast<double>(kp[i]);
      }
      c.swap(n);
    }
  return c;
}

std::vector<std::vector<int>> multi_indices(std::size_t d, int s) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(d, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == d) {
      a[i] = left;
      out.push_back(a);
      return;
    }
    for (int k = left; k >= 0; --k) {
      a[i] = k;
      self(self, i + 1, left - k);
    }
  };
  rec(rec, 0, s);
  return out;
}

// Derivative tables of the factors on the q grids.
struct Tables {
  std::size_t n1 = 0, n2 = 0;
  std::vector<std::vector<double>> h, A, B;  // [order][index]
};

Tables make_tables(const PerturbationSpec& spec, int order, std::size_t oversample) {
  Tables t;
  const double degA = std::max(1.0, spec.v.A.degree()), degB = std::max(1.0, spec.v.B.degree());
  t.n1 = pow2_at_least(std::max(256.0, static_cast<double>(oversample) * degA + 1));
  t.n2 = pow2_at_least(std::max(256.0, static_cast<double>(oversample) * degB + 1));
  auto h = one_minus_cos();
  for (int j = 0; j <= order; ++j) {
    t.h.push_back(sample_values(h.derivative(j), t.n1));
    t.A.push_back(sample_values(spec.v.A.derivative(j), t.n1));
    t.B.push_back(sample_values(spec.v.B.derivative(j), t.n2));
  }
  return t;
}

// sup over the q grid of |pend c_s h^{(s)}(q1) + w sum_j c_j A^{(j)}(q1) B^{(s-j)}(q2)|.
double separable_sup(const Tables& t, const std::vector<double>& c, double pend, double w, Exec exec) {
  const std::size_t s = c.size() - 1;
  auto row = [&](std::size_t i1) {
    const double base = pend * c[s] * t.h[s][i1];
    std::vector<double> a(s + 1);
    for (std::size_t j = 0; j <= s; ++j) a[j] = w * c[j] * t.A[j][i1];
    double best = 0.0;
    for (std::size_t i2 = 0; i2 < t.n2; ++i2) {
      double v = base;
      for (std::size_t j = 0; j <= s; ++j) v += a[j] * t.B[s - j][i2];
      best = std::max(best, std::fabs(v));
    }
    return best;
  };
  double best = 0.0;
  if (exec == Exec::kSerial) {
    for (std::size_t i = 0; i < t.n1; ++i) best = std::max(best, row(i));
  } else {
    const long n = static_cast<long>(t.n1);
#pragma omp parallel for schedule(static) reduction(max : best) num_threads(worker_threads())
    for (long i = 0; i < n; ++i) best = std::max(best, row(static_cast<std::size_t>(i)));
  }
  return best;
}

long long isq(long long x) { return x * x; }

}  // namespace

// ---------------------------------------------------------------------------

PerturbationParams plan_parameters(std::size_t d, double tau, double eps_exp, double eps_size,
                                   const FrequencyVector& omega_pushed, double k_norm,
                                   const PerturbationConfig& config, double r,
                                   std::optional<double> k_prime_norm) {
  if (d < 2) throw DomainError("plan_parameters: d must be >= 2");
  if (!(tau >= 0.0)) throw DomainError("plan_parameters: tau must be >= 0");
  if (!(eps_exp > 0.0 && eps_exp < 0.5)) throw DomainError("plan_parameters: need 0 < eps_exp < 1/2");
  if (!(config.alpha >= 2.0)) throw DomainError("plan_parameters: alpha must be >= 2");
  if (!(k_norm > 0.0)) throw DomainError("plan_parameters: |k| must be positive");
  if (omega_pushed.dim() != d) throw DomainError("plan_parameters: frequency dimension mismatch");
  if (omega_pushed[0].is_zero())
    throw DomainError("exact resonance; change k");

  PerturbationParams p;
  p.d = d;
  p.tau = tau;
  p.eps_exp = eps_exp;
  p.eps_size = eps_size;
  const double dd = static_cast<double>(d);
  p.a = 2 * dd + 2 * tau - 2 - eps_exp;
  p.s0 = 2 * dd + 2 * tau;
  p.alpha = config.alpha;
  p.kappa = static_cast<int>(std::lround(config.alpha / eps_exp));
  if (p.kappa > config.kappa_cap) {
    p.warnings.push_back("kappa = " + std::to_string(p.kappa) + " capped at " +
                         std::to_string(config.kappa_cap) + "; asymptotic regime unreachable");
    p.kappa = config.kappa_cap;
    p.kappa_capped = true;
  }
  p.kappa = std::max(p.kappa, 2);
  p.k_norm = k_norm;
  p.k_prime_norm = k_prime_norm.value_or(k_norm);
  p.omega1 = std::fabs(omega_pushed[0].to_double());
  p.R_n = config.R_scale * p.omega1 / std::pow(k_norm, 1 + eps_exp);
  if (!(p.R_n > 0.0 && p.R_n < kPi)) throw DomainError("plan_parameters: R_n outside (0, pi)");
  p.M = std::max(1L, std::lround(config.M_scale * std::pow(k_norm, 1 + eps_exp) /
                                  std::pow(p.omega1, 1 - eps_exp)));
  p.N_budget = (2.0 * static_cast<double>(p.M) + 1.0) * k_norm;

  // Frequencies of P_N are m1 k + m2 k' with |m1| <= 2D+1, |m2| <= 2D, k' orthogonal to k.
  const long double kk = static_cast<long double>(k_norm) * k_norm;
  const long double kp = static_cast<long double>(p.k_prime_norm) * p.k_prime_norm;
  const long double budget = static_cast<long double>(2 * p.M + 1) * (2 * p.M + 1) * kk;
  auto fits = [&](long D) {
    long double m1 = 2 * D + 1, m2 = 2 * D;
    return m1 * m1 * kk + m2 * m2 * kp <= budget * (1 - 1e-15L);
  };
  long D = 1;
  if (!fits(D)) throw DomainError("plan_parameters: M too small for the degree budget");
  while (fits(D + 1)) ++D;
  p.jackson_degree = D;

  p.r_pred = r;
  if (eps_size > 0.0) {
    p.predicted_k_norm = std::pow(eps_size, -1.0 / (2 * dd + 2 * tau - eps_exp - r));
    p.predicted_N_budget = std::pow(eps_size, -(dd + tau + 1) / (2 * dd + 2 * tau - r));
  }
  return p;
}

StructuredV build_v_structured(const PerturbationParams& params, const PerturbationConfig& config) {
  const double R = params.R_n;
  const long D = params.jackson_degree;
  if (D < 1 || params.M < 1) throw DomainError("build_v: invalid degrees");
  const int p = (params.kappa + 3) / 2;
  auto phi = bump(R);
  // at least 64 samples across the support, and enough for the kernel
  const std::size_t ns =
      pow2_at_least(std::max({4096.0, 8.0 * static_cast<double>(D) * p, 64.0 * kPi / R}));
  std::vector<double> samples(ns);
  for (std::size_t i = 0; i < ns; ++i) samples[i] = phi(kTwoPi * static_cast<double>(i) / static_cast<double>(ns));

  StructuredV v;
  v.g = jackson_from_samples(samples, static_cast<int>(D), params.kappa);

  const std::size_t ng = pow2_at_least(std::max(
      {1024.0, static_cast<double>(config.oversample) * static_cast<double>(2 * D + 2), 64.0 * kPi / R}));
  auto gv = sample_values(v.g, ng);
  const double gmax = *std::max_element(gv.begin(), gv.end());
  const double gmin = *std::min_element(gv.begin(), gv.end());
  double omax = -std::numeric_limits<double>::infinity(), omin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ng; ++i)
    if (torus_dist(i, ng) > R) {
      omax = std::max(omax, gv[i]);
      omin = std::min(omin, gv[i]);
    }

  auto& th = v.thresholds;
  th.T_peak = gv[0] * gv[0];
  th.T_max = std::max(gmax * gmax, gmin * gmin);
  // T(u, w) = g(u) g(w) off the box: one factor outside, the other anywhere
  th.mu_measured = std::max({omax * gmax, omax * gmin, omin * gmax, omin * gmin});
  th.mu_formula = mu_formula(R, params.M, params.kappa);
  th.mu_alpha = std::pow(params.omega1, params.alpha);
  th.mu_disagree = !(th.mu_formula <= 10 * th.mu_alpha && th.mu_alpha <= 10 * th.mu_formula);
  th.peak_ok = th.T_peak >= 1.0;
  th.mu_ok = th.mu_measured < config.mu_max;

  const TrigPoly gs = v.g.shifted(0, -kPi);
  v.A = one_minus_cos() * (gs * gs);
  v.B = v.g * v.g;
  v.v_scale = std::pow(params.k_norm, -params.a) * std::pow(static_cast<double>(params.M), -2 * params.s0) /
              (th.T_max * th.T_max);

  // A as a function of u = q1 - pi is (1 + cos u) g(u)^2.
  double a_all = 0, a_out = 0, b_all = 0, b_out = 0;
  for (std::size_t i = 0; i < ng; ++i) {
    const double u = kTwoPi * static_cast<double>(i) / static_cast<double>(ng);
    const double av = (1 + std::cos(u)) * gv[i] * gv[i], bv = gv[i] * gv[i];
    a_all = std::max(a_all, av);
    b_all = std::max(b_all, bv);
    if (torus_dist(i, ng) > 1.5 * R) {
      a_out = std::max(a_out, av);
      b_out = std::max(b_out, bv);
    }
  }
  th.localization = v.v_scale * std::max(a_out * b_all, a_all * b_out);
  th.localization_bound = 4 * th.mu_measured * th.mu_measured *
                          std::pow(static_cast<double>(params.M), -2 * params.s0) *
                          std::pow(params.k_norm, -params.a);

  if (config.policy == ThresholdPolicy::kEnforce && !th.passed()) {
    std::ostringstream os;
    os << "approximation quality: T(pi,0) = " << th.T_peak << " (need >= 1), mu_n = " << th.mu_measured
       << " (need < " << config.mu_max << ") at M = " << params.M << ", D = " << D
       << ", kappa = " << params.kappa << "; increase M or kappa";
    throw ApproximationQualityError(os.str());
  }
  return v;
}

TrigPoly StructuredV::expand() const { return TrigPoly::tensor(A, B) * v_scale; }

TrigPoly build_v(const PerturbationParams& params, const PerturbationConfig& config) {
  return build_v_structured(params, config).expand();
}

double PerturbationSpec::degree() const { return std::sqrt(static_cast<double>(N_squared)); }

double PerturbationSpec::operator()(const double* x) const {
  double q1 = 0, q2 = 0;
  for (std::size_t i = 0; i < frame.dim(); ++i) {
    q1 += static_cast<double>(frame.k[i]) * x[i];
    q2 += static_cast<double>(frame.k_prime[i]) * x[i];
  }
  return pend_scale * (1 - std::cos(q1)) + v_weight * v(q1, q2);
}

bool PerturbationSpec::within_budget() const {
  const long long m = 2 * params.M + 1;
  return N_squared <= m * m * norm_squared(frame.k);
}

PerturbationSpec assemble_P(const PerturbationParams& params, const ResonanceFrame& frame,
                            const PerturbationConfig& config, bool expand) {
  if (frame.dim() != params.d) throw DomainError("assemble_P: frame dimension mismatch");
  if (std::fabs(norm(frame.k) - params.k_norm) > 1e-9 * params.k_norm)
    throw DomainError("assemble_P: params.k_norm differs from |frame.k|");
  PerturbationSpec spec;
  spec.params = params;
  spec.frame = frame;
  spec.v = build_v_structured(params, config);
  spec.pend_scale = std::pow(params.k_norm, -(params.a + 2));
  spec.v_weight = std::pow(params.k_norm, -2.0);

  // Exact degree: the tensor product carries (m1, +-m2) for every pair of factor frequencies.
  const auto& k = frame.k;
  const auto& kp = frame.k_prime;
  auto sq = [&](long m1, long m2) {
    long long s = 0;
    for (std::size_t i = 0; i < k.size(); ++i) s += isq(m1 * k[i] + m2 * kp[i]);
    return s;
  };
  long long n2 = sq(1, 0);  // pendulum term
  for (std::size_t i = 0; i < spec.v.A.size(); ++i)
    for (std::size_t j = 0; j < spec.v.B.size(); ++j) {
      const long m1 = spec.v.A.freq(i)[0], m2 = spec.v.B.freq(j)[0];
      n2 = std::max({n2, sq(m1, m2), sq(m1, -m2)});
    }
  spec.N_squared = n2;
  if (!spec.within_budget())
    throw DomainError("assemble_P: degree " + std::to_string(spec.degree()) + " exceeds (2M+1)|k| = " +
                      std::to_string(params.N_budget));

  if (expand) {
    spec.v_n = spec.v.expand();
    spec.P_N = one_minus_cos().substitute({k}) * spec.pend_scale + spec.v_n->substitute({k, kp}) * spec.v_weight;
  }
  return spec;
}

PerturbationSpec build_perturbation(const IntVec& k, const FrequencyVector& omega, double tau,
                                    double eps_exp, double eps_size, const PerturbationConfig& config,
                                    bool expand) {
  auto kp = orthogonal_partner(k, omega);
  auto frame = complete_frame(k, kp);
  auto pf = pushforward(frame, omega, tau);
  auto params = plan_parameters(k.size(), tau, eps_exp, eps_size, pf.omega_new, norm(k), config, 0.0, norm(kp));
  if (!pf.in_regime) params.warnings.push_back("pushforward out of regime");
  return assemble_P(params, frame, config, expand);
}

NormReport structured_norm(const PerturbationSpec& spec, int r, Exec exec) {
  if (r < 0) throw DomainError("structured_norm: r must be >= 0");
  auto t = make_tables(spec, r, 8);
  NormReport rep;
  rep.r = r;
  rep.grid_size = t.n1;
  rep.method = NormMethod::kGrid;
  const double w = spec.v_weight * spec.v.v_scale;
  for (int s = 0; s <= r; ++s)
    for (const auto& alpha : multi_indices(spec.frame.dim(), s)) {
      double sup = separable_sup(t, chain_coefficients(spec.frame.k, spec.frame.k_prime, alpha),
                                 spec.pend_scale, w, exec);
      if (s == 0) rep.sup_norm = sup;
      rep.value += sup;
    }
  return rep;
}

BernsteinReport structured_bernstein(const PerturbationSpec& spec, int s, Exec exec) {
  if (s < 1) throw DomainError("structured_bernstein: s must be >= 1");
  auto t = make_tables(spec, s, 16);
  const double w = spec.v_weight * spec.v.v_scale;
  BernsteinReport rep;
  for (std::size_t i = 0; i < spec.frame.dim(); ++i) {
    std::vector<int> alpha(spec.frame.dim(), 0);
    alpha[i] = s;
    rep.lhs = std::max(rep.lhs, separable_sup(t, chain_coefficients(spec.frame.k, spec.frame.k_prime, alpha),
                                              spec.pend_scale, w, exec));
  }
  rep.rhs = std::pow(spec.degree(), s) * separable_sup(t, {1.0}, spec.pend_scale, w, exec);
  rep.pass = rep.lhs <= rep.rhs * (1 + 1e-9);
  return rep;
}

NormReport perturbation_norm(const PerturbationSpec& spec, double r, Exec exec) {
  if (r == std::floor(r)) return structured_norm(spec, static_cast<int>(r), exec);
  if (!spec.P_N) throw DomainError("perturbation_norm: fractional r needs the expanded P_N");
  long mx = 0;
  for (long m : spec.P_N->max_abs_freq()) mx = std::max(mx, m);
  const std::size_t grid = pow2_at_least(std::max(64.0, 4.0 * static_cast<double>(mx) + 1));
  const double pts = std::pow(static_cast<double>(grid), static_cast<double>(spec.params.d));
  if (pts * static_cast<double>(spec.P_N->size()) > 2e9 || pts * pts > 4e10)
    throw DomainError("perturbation_norm: fractional r on this build needs a grid of " + std::to_string(grid) +
                      " per axis; too large");
  return holder_norm(*spec.P_N, r, grid, exec);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_slope: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

ScalingReport norm_scaling_report(const FrequencyVector& omega, double tau, double eps_exp,
                                  const std::vector<double>& r_list, const std::vector<IntVec>& k_sequence,
                                  PerturbationConfig config, Exec exec) {
  if (r_list.empty()) throw DomainError("norm_scaling_report: empty r list");
  for (double r : r_list)
    if (r < 0 || r != std::floor(r)) throw DomainError("norm_scaling_report: r must be a nonnegative integer");
  config.policy = ThresholdPolicy::kRecord;
  const std::size_t n = k_sequence.size();
  std::vector<std::optional<ScalingRow>> rows(n);
  auto one = [&](std::size_t i) {
    try {
      auto spec = build_perturbation(k_sequence[i], omega, tau, eps_exp, 0.0, config, false);
      ScalingRow row;
      row.k = k_sequence[i];
      row.k_norm = spec.params.k_norm;
      row.omega1 = spec.params.omega1;
      row.M = spec.params.M;
      row.jackson_degree = spec.params.jackson_degree;
      row.N = spec.degree();
      row.N_budget = spec.params.N_budget;
      row.thresholds_ok = spec.v.thresholds.passed();
      for (double r : r_list) row.norms[r] = structured_norm(spec, static_cast<int>(r), Exec::kSerial).value;
      rows[i] = std::move(row);
    } catch (const DomainError&) {
      // unusable vector (exact resonance, no partner, ...): left out of the fit
    }
  };
  if (exec == Exec::kSerial) {
    for (std::size_t i = 0; i < n; ++i) one(i);
  } else {
    const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_threads())
    for (long i = 0; i < ln; ++i) one(static_cast<std::size_t>(i));
  }
  ScalingReport rep;
  for (auto& r : rows)
    if (r) rep.rows.push_back(std::move(*r));
  if (rep.rows.size() < 3)
    throw InsufficientSequenceError("insufficient sequence: " + std::to_string(rep.rows.size()) +
                                    " usable resonance vectors, need >= 3");
  const double d = static_cast<double>(omega.dim());
  std::vector<double> lk, lN;
  for (const auto& row : rep.rows) {
    lk.push_back(std::log(row.k_norm));
    lN.push_back(std::log(row.N));
  }
  for (double r : r_list) {
    std::vector<double> ln;
    for (const auto& row : rep.rows) ln.push_back(std::log(row.norms.at(r)));
    ScalingFit f;
    f.r = r;
    f.slope = fit_slope(lk, ln);
    f.predicted = -(2 * d + 2 * tau - eps_exp - r);
    f.rel_dev = std::fabs(f.slope - f.predicted) / std::fabs(f.predicted);
    f.N_exponent = fit_slope(ln, lN);
    f.N_exponent_predicted = -(d + tau + 1) / (2 * d + 2 * tau - r);
    rep.fits.push_back(f);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

std::string spec_to_json(const PerturbationSpec& spec) {
  using nlohmann::ordered_json;
  const auto& p = spec.params;
  ordered_json j;
  j["format"] = "ckam-perturbation";
  j["params"] = {{"d", p.d},
                 {"tau", p.tau},
                 {"eps_exp", p.eps_exp},
                 {"eps_size", p.eps_size},
                 {"a", p.a},
                 {"s0", p.s0},
                 {"alpha", p.alpha},
                 {"kappa", p.kappa},
                 {"kappa_capped", p.kappa_capped},
                 {"k_norm", p.k_norm},
                 {"k_prime_norm", p.k_prime_norm},
                 {"omega1", p.omega1},
                 {"R_n", p.R_n},
                 {"M", p.M},
                 {"jackson_degree", p.jackson_degree},
                 {"N_budget", p.N_budget},
                 {"r_pred", p.r_pred},
                 {"predicted_k_norm", p.predicted_k_norm},
                 {"predicted_N_budget", p.predicted_N_budget},
                 {"warnings", p.warnings}};
  j["frame"] = {{"k", spec.frame.k}, {"k_prime", spec.frame.k_prime}, {"fill_rows", spec.frame.fill_rows},
                {"det", spec.frame.det.str()}};
  const auto& t = spec.v.thresholds;
  j["thresholds"] = {{"T_peak", t.T_peak},
                     {"T_max", t.T_max},
                     {"mu_measured", t.mu_measured},
                     {"mu_formula", t.mu_formula},
                     {"mu_alpha", t.mu_alpha},
                     {"mu_disagree", t.mu_disagree},
                     {"peak_ok", t.peak_ok},
                     {"mu_ok", t.mu_ok},
                     {"localization", t.localization},
                     {"localization_bound", t.localization_bound}};
  j["pend_scale"] = spec.pend_scale;
  j["v_weight"] = spec.v_weight;
  j["v_scale"] = spec.v.v_scale;
  j["N_squared"] = spec.N_squared;
  j["degree"] = spec.degree();
  j["g"] = ordered_json::parse(spec.v.g.to_json());
  j["A"] = ordered_json::parse(spec.v.A.to_json());
  j["B"] = ordered_json::parse(spec.v.B.to_json());
  if (!spec.norm_table.empty()) {
    ordered_json nt = ordered_json::array();
    for (const auto& [r, rep] : spec.norm_table)
      nt.push_back({{"r", r}, {"value", rep.value}, {"sup", rep.sup_norm}, {"grid", rep.grid_size}});
    j["norms"] = nt;
  }
  return j.dump(1) + "\n";
}

PerturbationSpec spec_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "ckam-perturbation") throw DomainError("not a perturbation spec file");
    PerturbationSpec s;
    const auto& p = j.at("params");
    auto& q = s.params;
    q.d = p.at("d").get<std::size_t>();
    q.tau = p.at("tau").get<double>();
    q.eps_exp = p.at("eps_exp").get<double>();
    q.eps_size = p.at("eps_size").get<double>();
    q.a = p.at("a").get<double>();
    q.s0 = p.at("s0").get<double>();
    q.alpha = p.at("alpha").get<double>();
    q.kappa = p.at("kappa").get<int>();
    q.kappa_capped = p.at("kappa_capped").get<bool>();
    q.k_norm = p.at("k_norm").get<double>();
    q.k_prime_norm = p.at("k_prime_norm").get<double>();
    q.omega1 = p.at("omega1").get<double>();
    q.R_n = p.at("R_n").get<double>();
    q.M = p.at("M").get<long>();
    q.jackson_degree = p.at("jackson_degree").get<long>();
    q.N_budget = p.at("N_budget").get<double>();
    q.r_pred = p.at("r_pred").get<double>();
    q.predicted_k_norm = p.at("predicted_k_norm").get<double>();
    q.predicted_N_budget = p.at("predicted_N_budget").get<double>();
    q.warnings = p.at("warnings").get<std::vector<std::string>>();
    const auto& f = j.at("frame");
    s.frame.k = f.at("k").get<IntVec>();
    s.frame.k_prime = f.at("k_prime").get<IntVec>();
    s.frame.fill_rows = f.at("fill_rows").get<std::vector<IntVec>>();
    s.frame.det = BigInt(f.at("det").get<std::string>());
    const auto& t = j.at("thresholds");
    auto& th = s.v.thresholds;
    th.T_peak = t.at("T_peak").get<double>();
    th.T_max = t.at("T_max").get<double>();
    th.mu_measured = t.at("mu_measured").get<double>();
    th.mu_formula = t.at("mu_formula").is_null() ? std::numeric_limits<double>::infinity()
                                                  : t.at("mu_formula").get<double>();
    th.mu_alpha = t.at("mu_alpha").get<double>();
    th.mu_disagree = t.at("mu_disagree").get<bool>();
    th.peak_ok = t.at("peak_ok").get<bool>();
    th.mu_ok = t.at("mu_ok").get<bool>();
    th.localization = t.at("localization").get<double>();
    th.localization_bound = t.at("localization_bound").get<double>();
    s.pend_scale = j.at("pend_scale").get<double>();
    s.v_weight = j.at("v_weight").get<double>();
    s.v.v_scale = j.at("v_scale").get<double>();
    s.N_squared = j.at("N_squared").get<long long>();
    s.v.g = TrigPoly::from_json(j.at("g").dump());
    s.v.A = TrigPoly::from_json(j.at("A").dump());
    s.v.B = TrigPoly::from_json(j.at("B").dump());
    if (q.d != s.frame.dim()) throw DomainError("perturbation spec: dimension mismatch");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("perturbation spec json: ") + e.what());
  }
}

}  // namespace ckam
