#include "ckam/error.hpp"
#include "ckam/trigpoly.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace ckam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

// Values of p at the grid points 2pi J / G, J in {0..G-1}^d (row major). The
// phase <m, J> is reduced mod G in integers, so large frequencies lose nothing.
std::vector<double> grid_values(const TrigPoly& p, std::size_t G, Exec exec) {
  const std::size_t d = p.dim();
  const double pts = std::pow(static_cast<double>(G), static_cast<double>(d));
  if (pts > 1e9) throw DomainError("grid too large for direct evaluation");
  const std::size_t n = ipow(G, d);
  std::vector<double> ct(G), st(G);
  for (std::size_t i = 0; i < G; ++i) {
    ct[i] = std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(G));
    st[i] = std::sin(kTwoPi * static_cast<double>(i) / static_cast<double>(G));
  }
  // frequencies reduced mod G once
  const std::size_t nt = p.size();
  std::vector<long> fm(nt * d);
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t j = 0; j < d; ++j) {
      long g = static_cast<long>(G);
      fm[t * d + j] = ((p.freq(t)[j] % g) + g) % g;
    }
  std::vector<double> out(n);
  auto body = [&](std::size_t idx) {
    std::size_t J[8];
    std::size_t r = idx;
    for (std::size_t j = d; j-- > 0;) {
      J[j] = r % G;
      r /= G;
    }
    double s = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      std::size_t ph = 0;
      for (std::size_t j = 0; j < d; ++j) ph += static_cast<std::size_t>(fm[t * d + j]) * J[j];
      ph %= G;
      s += p.cos_coeff(t) * ct[ph] + p.sin_coeff(t) * st[ph];
    }
    out[idx] = s;
  };
  if (d > 8) throw DomainError("grid evaluation supports dim <= 8");
  if (exec == Exec::kSerial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (long i = 0; i < ln; ++i) body(static_cast<std::size_t>(i));
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// All multi-indices of total order s in d variables.
std::vector<std::vector<int>> multi_indices(std::size_t d, int s) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(d, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == d) {
      a[i] = left;
      out.push_back(a);
      return;
    }
    for (int k = left; k >= 0; --k) {
      a[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, s);
  return out;
}

// sup over grid pairs with torus separation in [2pi/G, pi] of |v(x)-v(y)|/|x-y|^theta.
double holder_seminorm(const std::vector<double>& v, std::size_t G, std::size_t d, double theta,
                       Exec exec) {
  const std::size_t n = v.size();
  const double h = kTwoPi / static_cast<double>(G);
  if (static_cast<double>(n) * static_cast<double>(n) > 4e10)
    throw DomainError("Hoelder seminorm: grid^(2 dim) too large; use a coarser grid");
  auto offset_value = [&](std::size_t off) {
    std::size_t O[8];
    std::size_t r = off;
    double dist2 = 0.0;
    for (std::size_t j = d; j-- > 0;) {
      O[j] = r % G;
      r /= G;
      std::size_t m = std::min(O[j], G - O[j]);
      dist2 += (h * static_cast<double>(m)) * (h * static_cast<double>(m));
    }
    double dist = std::sqrt(dist2);
    if (dist < h * (1 - 1e-12) || dist > std::numbers::pi * (1 + 1e-12)) return 0.0;
    double inv = std::pow(dist, -theta);
    double best = 0.0;
    for (std::size_t idx = 0; idx < n; ++idx) {
      std::size_t r2 = idx, other = 0, mul = 1;
      std::size_t J[8];
      for (std::size_t j = d; j-- > 0;) {
        J[j] = r2 % G;
        r2 /= G;
      }
      for (std::size_t j = d; j-- > 0;) {
        other += ((J[j] + O[j]) % G) * mul;
        mul *= G;
      }
      best = std::max(best, std::fabs(v[idx] - v[other]));
    }
    return best * inv;
  };
  double best = 0.0;
  if (exec == Exec::kSerial) {
    for (std::size_t o = 1; o < n; ++o) best = std::max(best, offset_value(o));
  } else {
    const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best) num_threads(worker_threads())
    for (long o = 1; o < ln; ++o) best = std::max(best, offset_value(static_cast<std::size_t>(o)));
  }
  return best;
}

void check_r(double r, std::size_t grid) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("holder_norm: r must be >= 0");
  if (grid < 64) throw DomainError("holder_norm: grid must be >= 64");
}

NormReport poly_norm_at(const TrigPoly& p, double r, std::size_t grid, Exec exec) {
  NormReport rep;
  rep.r = r;
  rep.grid_size = grid;
  rep.method = NormMethod::kAnalytic;
  const int ir = static_cast<int>(std::floor(r));
  const double theta = r - ir;
  const std::size_t d = p.dim();
  double total = 0.0;
  for (int s = 0; s <= ir; ++s)
    for (const auto& a : multi_indices(d, s)) {
      auto vals = grid_values(p.derivative(a), grid, exec);
      double sup = max_abs(vals);
      if (s == 0) rep.sup_norm = sup;
      total += sup;
      if (s == ir && theta > 0) total += holder_seminorm(vals, grid, d, theta, exec);
    }
  rep.value = total;
  return rep;
}

std::vector<std::vector<double>> fn_tables(const PeriodicFn& f, int order, std::size_t G) {
  std::vector<std::vector<double>> t(static_cast<std::size_t>(order) + 1, std::vector<double>(G));
  for (std::size_t i = 0; i < G; ++i) {
    auto j = f.jet(kTwoPi * static_cast<double>(i) / static_cast<double>(G), order);
    for (int k = 0; k <= order; ++k) t[static_cast<std::size_t>(k)][i] = j[static_cast<std::size_t>(k)];
  }
  return t;
}

NormReport fn_norm_at(const PeriodicFn& f, double r, std::size_t grid) {
  NormReport rep;
  rep.r = r;
  rep.grid_size = grid;
  rep.method = NormMethod::kGrid;
  const int ir = static_cast<int>(std::floor(r));
  const double theta = r - ir;
  if (theta == 0.0) {  // running maxima only; narrow supports need very fine grids
    std::vector<double> sup(static_cast<std::size_t>(ir) + 1, 0.0);
    for (std::size_t i = 0; i < grid; ++i) {
      auto j = f.jet(kTwoPi * static_cast<double>(i) / static_cast<double>(grid), ir);
      for (std::size_t k = 0; k < sup.size(); ++k) sup[k] = std::max(sup[k], std::fabs(j[k]));
    }
    rep.sup_norm = sup[0];
    for (double s : sup) rep.value += s;
    return rep;
  }
  auto tabs = fn_tables(f, ir, grid);
  double total = 0.0;
  for (int s = 0; s <= ir; ++s) total += max_abs(tabs[static_cast<std::size_t>(s)]);
  rep.sup_norm = max_abs(tabs[0]);
  if (theta > 0)
    total += holder_seminorm(tabs[static_cast<std::size_t>(ir)], grid, 1, theta, Exec::kParallel);
  rep.value = total;
  return rep;
}

double rel_delta(double a, double b) { return a != 0.0 ? std::fabs(a - b) / std::fabs(a) : 0.0; }

}  // namespace

NormReport holder_norm(const PeriodicFn& f, double r, std::size_t grid) {
  check_r(r, grid);
  if (!f.has_order(static_cast<int>(std::floor(r))))
    throw DomainError("holder_norm: derivative order unavailable");
  auto rep = fn_norm_at(f, r, grid);
  if (grid / 2 >= 64 && r == std::floor(r))
    rep.refinement_delta = rel_delta(rep.value, fn_norm_at(f, r, grid / 2).value);
  return rep;
}

NormReport holder_norm(const TrigPoly& p, double r, std::size_t grid, Exec exec) {
  check_r(r, grid);
  auto rep = poly_norm_at(p, r, grid, exec);
  if (grid / 2 >= 64 && r == std::floor(r))
    rep.refinement_delta = rel_delta(rep.value, poly_norm_at(p, r, grid / 2, exec).value);
  return rep;
}

double sup_grid(const TrigPoly& p, std::size_t grid, Exec exec) {
  return max_abs(grid_values(p, grid, exec));
}

BernsteinReport bernstein_verify(const TrigPoly& t, int s, std::size_t grid, Exec exec) {
  if (s < 1) throw DomainError("bernstein_verify: s must be >= 1");
  if (t.empty()) throw DomainError("bernstein_verify: T must be nonzero");
  if (grid == 0) {
    long mx = 0;
    for (long m : t.max_abs_freq()) mx = std::max(mx, m);
    grid = std::max<std::size_t>(64, 16 * static_cast<std::size_t>(mx));
  }
  BernsteinReport rep;
  for (std::size_t i = 0; i < t.dim(); ++i) {
    std::vector<int> a(t.dim(), 0);
    a[i] = s;
    rep.lhs = std::max(rep.lhs, sup_grid(t.derivative(a), grid, exec));
  }
  rep.rhs = std::pow(t.degree(), s) * sup_grid(t, grid, exec);
  rep.pass = rep.lhs <= rep.rhs * (1 + 1e-9);
  return rep;
}

}  // namespace ckam
