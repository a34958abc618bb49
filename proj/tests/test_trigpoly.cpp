#include "ckam/error.hpp"
#include "ckam/trigpoly.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ckam;

namespace {

constexpr double kPi = std::numbers::pi;

// C^2 norm of a 1-d function by central differences on a uniform grid.
double fd_c2(const PeriodicFn& f, std::size_t n) {
  const double h = 2 * kPi / static_cast<double>(n);
  double s0 = 0, s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = h * static_cast<double>(i);
    double fm = f(x - h), f0 = f(x), fp = f(x + h);
    s0 = std::max(s0, std::fabs(f0));
    s1 = std::max(s1, std::fabs((fp - fm) / (2 * h)));
    s2 = std::max(s2, std::fabs((fp - 2 * f0 + fm) / (h * h)));
  }
  return s0 + s1 + s2;
}

double sup_err(const TrigPoly& p, const PeriodicFn& f, int n = 10000) {
  double e = 0;
  for (int i = 0; i < n; ++i) {
    double x = -kPi + 2 * kPi * i / n;
    e = std::max(e, std::fabs(p(x) - f(x)));
  }
  return e;
}

}  // namespace

TEST_CASE("bump") {
  auto b = bump(0.5);
  CHECK(std::fabs(b(0.0) - std::sqrt(2.0)) < 1e-12);
  for (double x : {0.5, -0.5, 1.0, -1.0, 3.0}) CHECK(b(x) == 0.0);
  CHECK(b(0.3) == doctest::Approx(b(0.3 + 2 * kPi)).epsilon(1e-14));
  CHECK_THROWS_AS(bump(0.0), DomainError);
  CHECK_THROWS_AS(bump(4.0), DomainError);
  // jets against finite differences
  auto j = b.jet(0.2, 2);
  double h = 1e-5;
  CHECK(j[1] == doctest::Approx((b(0.2 + h) - b(0.2 - h)) / (2 * h)).epsilon(1e-7));
  // C^2 scaling: ratio for R = 0.25 vs 0.5 near 4
  double a = holder_norm(bump(0.25), 2).value, c = holder_norm(bump(0.5), 2).value;
  CHECK(a / c == doctest::Approx(4.0).epsilon(0.3));
  CHECK(a == doctest::Approx(fd_c2(bump(0.25), 1 << 16)).epsilon(1e-3));
}

TEST_CASE("TrigPoly algebra") {
  auto c1 = TrigPoly::from_terms(1, {{{1}, 1.0, 0.0}});
  // cos^2 = (1 + cos 2x)/2
  auto sq = c1 * c1;
  CHECK(sq.size() == 2);
  CHECK(sq(0.7) == doctest::Approx(std::cos(0.7) * std::cos(0.7)).epsilon(1e-15));
  // canonical folding of negative frequencies
  auto neg = TrigPoly::from_terms(1, {{{-3}, 0.5, 0.25}});
  CHECK(neg.freq(0)[0] == 3);
  CHECK(neg(1.1) == doctest::Approx(0.5 * std::cos(-3.3) + 0.25 * std::sin(-3.3)));
  // a + (-a) vanishes exactly
  CHECK((neg - neg).empty());
  // shift by pi flips odd frequencies
  auto sh = TrigPoly::from_terms(1, {{{1}, 1.0, 0.0}, {{2}, 0.0, 1.0}}).shifted(0, -kPi);
  CHECK(sh(0.4) == doctest::Approx(-std::cos(0.4) + std::sin(0.8)));
  // tensor product and substitution
  auto a = TrigPoly::from_terms(1, {{{2}, 1.0, 0.5}});
  auto b = TrigPoly::from_terms(1, {{{0}, 1.0, 0.0}, {{1}, 0.0, 2.0}});
  auto t = TrigPoly::tensor(a, b);
  std::vector<double> q{0.3, -1.2};
  CHECK(t(q) == doctest::Approx(a(0.3) * b(-1.2)).epsilon(1e-14));
  auto s = t.substitute({{-3, 5}, {5, 3}});
  std::vector<double> x{0.11, 0.57};
  CHECK(s(x) == doctest::Approx(t(std::vector<double>{-3 * 0.11 + 5 * 0.57, 5 * 0.11 + 3 * 0.57}))
                    .epsilon(1e-13));
  CHECK(s.degree() == doctest::Approx(std::sqrt(4.0 * 34 + 34)));
}

TEST_CASE("TrigPoly derivative is exact and matches finite differences") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<TrigPoly::Term> terms;
  for (long a = -3; a <= 3; ++a)
    for (long b = 0; b <= 3; ++b) terms.push_back({{a, b}, u(rng), u(rng)});
  auto p = TrigPoly::from_terms(2, terms);
  auto px = p.derivative(std::vector<int>{1, 0});
  auto pxy = p.derivative(std::vector<int>{1, 1});
  const double h = 1e-4;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x{u(rng) * kPi, u(rng) * kPi};
    auto xp = x, xm = x;
    xp[0] += h;
    xm[0] -= h;
    CHECK(px(x) == doctest::Approx((p(xp) - p(xm)) / (2 * h)).epsilon(1e-6));
    auto xpp = xp, xpm = xp, xmp = xm, xmm = xm;
    xpp[1] += h;
    xpm[1] -= h;
    xmp[1] += h;
    xmm[1] -= h;
    CHECK(pxy(x) == doctest::Approx((p(xpp) - p(xpm) - p(xmp) + p(xmm)) / (4 * h * h)).epsilon(1e-5));
  }
}

TEST_CASE("TrigPoly json round trip is bit stable") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<TrigPoly::Term> terms;
  for (long a = 0; a < 20; ++a) terms.push_back({{a, -a, 2 * a}, u(rng) / 3, u(rng) * 1e-9});
  auto p = TrigPoly::from_terms(3, terms);
  auto text = p.to_json();
  auto q = TrigPoly::from_json(text);
  CHECK(q == p);
  CHECK(q.to_json() == text);
  CHECK_THROWS_AS(TrigPoly::from_json("{\"dim\": 1}"), DomainError);
}

TEST_CASE("jackson") {
  auto c = jackson(PeriodicFn::constant(0.7), 12, 2);
  REQUIRE(c.poly.size() == 1);
  CHECK(c.poly.cos_coeff(0) == 0.7);
  CHECK(sup_err(c.poly, PeriodicFn::constant(0.7)) == 0.0);

  auto cosf = PeriodicFn::harmonic(1, 0, 1);
  auto r = jackson(cosf, 8, 2);
  CHECK(r.poly.degree() <= 8);
  CHECK(sup_err(r.poly, cosf) <= r.error_bound);

  for (int kappa : {2, 4, 6})
    for (int M : {16, 40, 64}) {
      auto j = jackson(bump(1.0), M, kappa);
      CHECK(j.poly.degree() <= M);
      CHECK(sup_err(j.poly, bump(1.0)) <= j.error_bound);
    }

  // linear at fixed (M, kappa)
  auto f = bump(0.8), g = PeriodicFn::harmonic(0.3, -1.0, 3);
  auto lin = jackson(PeriodicFn::combine(2.0, f, -3.0, g), 32, 4).poly;
  auto sep = jackson(f, 32, 4).poly * 2.0 + jackson(g, 32, 4).poly * -3.0;
  for (double x : {-2.0, -0.3, 0.0, 0.9, 2.5}) CHECK(lin(x) == doctest::Approx(sep(x)).epsilon(1e-12));

  CHECK_THROWS_AS(jackson(bump(1.0), 0, 2), DomainError);
  PeriodicFn rough([](double x, int, double* out) { out[0] = std::fabs(x); }, 0, std::nullopt, "abs");
  CHECK_THROWS_AS(jackson(rough, 16, 2), DomainError);
}

TEST_CASE("jackson kernel multiplier") {
  auto mu = jackson_multiplier(20, 2);
  CHECK(mu[0] == 1.0);
  for (std::size_t j = 1; j < mu.size(); ++j) {
    CHECK(mu[j] < mu[j - 1]);
    CHECK(mu[j] > 0.0);
  }
  // second moment of a positive normalized kernel shrinks with M
  CHECK(jackson_moment(64, 2, 2) < jackson_moment(16, 2, 2) / 4);
  CHECK(jackson_moment(16, 2, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("holder_norm") {
  auto cosf = PeriodicFn::harmonic(1, 0, 1);
  CHECK(holder_norm(cosf, 0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(holder_norm(cosf, 1).value == doctest::Approx(2.0).epsilon(1e-12));
  // seminorm oracle: max over h of 2 sin(h/2)/sqrt(h)
  double best = 0;
  for (int i = 1; i <= 200000; ++i) {
    double h = kPi * i / 200000;
    best = std::max(best, 2 * std::sin(h / 2) / std::sqrt(h));
  }
  CHECK(best == doctest::Approx(1.2039).epsilon(1e-4));
  CHECK(holder_norm(cosf, 1.5).value == doctest::Approx(2 + best).epsilon(0.01));
  CHECK(holder_norm(cosf, 1.5).value == doctest::Approx(3.2039).epsilon(0.01));

  auto cp = TrigPoly::from_terms(1, {{{1}, 1.0, 0.0}});
  CHECK(holder_norm(cp, 0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(holder_norm(cp, 1).value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(holder_norm(cp, 1.5, 1024).value == doctest::Approx(3.2039).epsilon(0.01));
  CHECK_THROWS_AS(holder_norm(cp, 1.0, 32), DomainError);

  // monotone in r and in grid refinement
  auto j = jackson(bump(1.0), 24, 2).poly;
  double prev = 0;
  for (int r = 0; r <= 3; ++r) {
    double v = holder_norm(j, r, 512).value;
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(holder_norm(j, 2, 1024).value >= holder_norm(j, 2, 512).value);
  CHECK(holder_norm(j, 0, 512).value == doctest::Approx(sup_grid(j, 512)));

  // 2-d: sup of cos(x)cos(y) and the sum over multi-indices
  auto p2 = TrigPoly::tensor(cp, cp);
  CHECK(holder_norm(p2, 1, 256).value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(holder_norm(p2, 2, 256).value == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("serial and parallel grid kernels agree") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<TrigPoly::Term> terms;
  for (long a = -6; a <= 6; ++a)
    for (long b = 0; b <= 6; ++b) terms.push_back({{a, b}, u(rng), u(rng)});
  auto p = TrigPoly::from_terms(2, terms);
  CHECK(sup_grid(p, 128, Exec::kSerial) == sup_grid(p, 128, Exec::kParallel));
  CHECK(holder_norm(p, 0.5, 64, Exec::kSerial).value == holder_norm(p, 0.5, 64, Exec::kParallel).value);
}

TEST_CASE("bernstein_verify") {
  for (long M : {1, 5, 17}) {
    auto t = TrigPoly::from_terms(1, {{{M}, 1.0, 0.0}});
    auto rep = bernstein_verify(t, 1);
    CHECK(rep.lhs == doctest::Approx(static_cast<double>(M)).epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(static_cast<double>(M)).epsilon(1e-12));
    CHECK(rep.pass);
  }
  auto k = bernstein_verify(TrigPoly::constant(1, 3.0), 1);
  CHECK(k.lhs == 0.0);
  CHECK(k.pass);
  auto j = jackson(bump(1.0), 32, 2).poly;
  CHECK(bernstein_verify(j, 2).pass);
  CHECK_THROWS_AS(bernstein_verify(TrigPoly(1), 1), DomainError);
  // 2-d with Euclidean degree
  auto t2 = TrigPoly::from_terms(2, {{{3, 4}, 1.0, 0.0}, {{1, -1}, 0.5, 0.2}});
  CHECK(bernstein_verify(t2, 2).pass);
}
