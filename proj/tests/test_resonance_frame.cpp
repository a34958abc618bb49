#include "ckam/error.hpp"
#include "ckam/resonance_frame.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

using namespace ckam;

namespace {

void check_orthogonal(const ResonanceFrame& f) {
  auto rows = f.rows();
  REQUIRE(rows.size() == f.dim());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) CHECK(dot(rows[a], rows[b]) == 0);
  for (const auto& r : f.fill_rows) {
    long g = 0;
    for (long x : r) g = std::gcd(g, x);
    CHECK(g == 1);
  }
  CHECK(f.det != 0);
}

}  // namespace

TEST_CASE("orthogonal partner, d = 2") {
  auto g = FrequencyVector::golden();
  CHECK(orthogonal_partner({3, -5}, g) == IntVec{5, 3});
  CHECK(orthogonal_partner({-3, 5}, g) == IntVec{5, 3});
  CHECK(orthogonal_partner({1, 0}, g) == IntVec{0, 1});
  CHECK(small_denominator(g, {0, 1}).to_double() == doctest::Approx(0.6180339887498949));
  // <k',w> = k1 w2 - k2 w1 up to the normalizing sign
  std::mt19937 rng(3);
  std::uniform_int_distribution<long> u(-30, 30);
  for (int i = 0; i < 50; ++i) {
    IntVec k{u(rng), u(rng)};
    if (k[0] == 0 && k[1] == 0) continue;
    auto kp = orthogonal_partner(k, g);
    BigFloat direct = g[1] * k[0] - g[0] * k[1];
    BigFloat got = small_denominator(g, kp);
    CHECK((got == direct || got == -direct));
  }
}

TEST_CASE("orthogonal partner, d = 3") {
  FrequencyVector w(
      3,
      [](std::size_t i, unsigned b) {
        BigFloat g = (sqrt(BigFloat(5L, b)) - BigFloat(1L, b)) / BigFloat(2L, b);
        if (i == 0) return BigFloat(1L, b);
        return i == 1 ? g : g * g;
      },
      "golden-3");
  // 1 + gamma + gamma^2 = 2 exactly
  CHECK(std::fabs(small_denominator(w, {1, 1, 1}).to_double() - 2.0) < 1e-70);
  IntVec kp = orthogonal_partner({1, 1, -2}, w);
  CHECK(dot(kp, {1, 1, -2}) == 0);
  // Exhaustive oracle in long double over the same box.
  long double gl = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double wl[3] = {1.0L, gl, gl * gl};
  long double best = -1;
  IntVec arg;
  for (long a = -5; a <= 5; ++a)
    for (long b = -5; b <= 5; ++b)
      for (long c = -5; c <= 5; ++c) {
        IntVec v{a, b, c};
        if (v == IntVec{0, 0, 0} || dot(v, {1, 1, -2}) != 0) continue;
        long n2 = norm_squared(v);
        if (n2 > 24) continue;
        long double r = std::fabs(a * wl[0] + b * wl[1] + c * wl[2]) / std::sqrt((long double)n2);
        if (r > best + 1e-15L) {
          best = r;
          arg = v;
        }
      }
  if (arg[0] < 0 || (arg[0] == 0 && arg[1] < 0))
    for (long& x : arg) x = -x;
  CHECK(kp == arg);
  CHECK(kp == IntVec{3, 1, 2});

  setenv("CKAM_THREADS", "3", 1);
  CHECK(orthogonal_partner({1, 1, -2}, w, 2.0, Exec::kParallel) ==
        orthogonal_partner({1, 1, -2}, w, 2.0, Exec::kSerial));
  unsetenv("CKAM_THREADS");
}

TEST_CASE("partner quality failure carries the best candidate") {
  // w orthogonal-ish to everything small: all partners have tiny <k',w>
  FrequencyVector w(std::vector<double>{1e-3, 1e-3, 1e-3});
  try {
    orthogonal_partner({1, 1, -2}, w);
    FAIL("expected PartnerQualityError");
  } catch (const PartnerQualityError& e) {
    CHECK(e.best_candidate.size() == 3);
    CHECK(e.best_inner < std::sqrt(6.0) / 8.0);
  }
}

TEST_CASE("complete_frame") {
  auto f2 = complete_frame({-3, 5}, {5, 3});
  CHECK(f2.fill_rows.empty());
  CHECK(f2.det == -34);
  auto f3 = complete_frame({1, 1, -2}, {1, 1, 1});
  REQUIRE(f3.fill_rows.size() == 1);
  CHECK(f3.fill_rows[0] == IntVec{1, -1, 0});
  check_orthogonal(f3);
  auto f3k = complete_frame({1, 1, -2}, {1, 1, 1}, FillMethod::kKernel);
  auto a = f3k.fill_rows[0], b = f3.fill_rows[0];
  CHECK((a == b || a == IntVec{-b[0], -b[1], -b[2]}));
  CHECK_THROWS_AS(complete_frame({1, 1, 0}, {1, 2, 3}), DomainError);
  CHECK_THROWS_AS(complete_frame({1, 0, 0}, {0, 0, 0}), DomainError);
  CHECK_THROWS_AS(complete_frame({1, 0}, {0, 1, 0}), DomainError);

  std::mt19937 rng(11);
  std::uniform_int_distribution<long> u(-6, 6);
  int made = 0;
  for (int t = 0; t < 200 && made < 40; ++t) {
    std::size_t d = 3 + static_cast<std::size_t>(t % 3);
    IntVec k(d);
    for (auto& x : k) x = u(rng);
    auto ker = integer_kernel({k});
    if (ker.size() != d - 1) continue;
    IntVec kp = ker[static_cast<std::size_t>(t) % ker.size()];
    auto f = complete_frame(k, kp);
    check_orthogonal(f);
    if (d == 3) {
      auto g = complete_frame(k, kp, FillMethod::kKernel);
      check_orthogonal(g);
      CHECK(dot(g.fill_rows[0], f.fill_rows[0]) * dot(g.fill_rows[0], f.fill_rows[0]) ==
            norm_squared(g.fill_rows[0]) * norm_squared(f.fill_rows[0]));
    }
    ++made;
  }
  CHECK(made == 40);
}

TEST_CASE("integer kernel") {
  auto ker = integer_kernel({{2, 4, 6}});
  CHECK(ker.size() == 2);
  for (const auto& v : ker) CHECK(dot(v, {2, 4, 6}) == 0);
  CHECK(integer_kernel({{1, 2}, {2, 4}}).size() == 1);
}

TEST_CASE("symplectic lift") {
  auto id = symplectic_lift(to_rational({{1, 0}, {0, 1}}));
  CHECK(id.verified);
  CHECK(id.K_inv_T == to_rational({{1, 0}, {0, 1}}));

  auto l = symplectic_lift(to_rational({{1, 1}, {1, -1}}));
  Rational h(1, 2);
  RatMatrix expect{{h, h}, {h, -h}};
  CHECK(l.K_inv_T == expect);
  CHECK(is_symplectic(l.phi()));

  auto f = complete_frame({-3, 5}, {5, 3});
  auto lf = symplectic_lift(f);
  CHECK(lf.verified);
  CHECK(determinant(lf.K) == -34);
  CHECK_THROWS_AS(symplectic_lift(to_rational({{1, 2}, {2, 4}})), DomainError);

  // a non-symplectic block matrix is rejected
  RatMatrix bad = l.phi();
  bad[2][2] = 1;
  CHECK_FALSE(is_symplectic(bad));
}

TEST_CASE("pushforward") {
  auto g = FrequencyVector::golden();
  auto f = complete_frame({-3, 5}, {5, 3});
  auto rep = pushforward(f, g, 0.0);
  long double gl = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  CHECK(rep.omega_new[0].to_double() == doctest::Approx((double)(5 * gl - 3)).epsilon(1e-14));
  CHECK(rep.omega_new[1].to_double() == doctest::Approx((double)(5 + 3 * gl)).epsilon(1e-14));
  CHECK(rep.omega_new[1].to_double() == doctest::Approx(6.854102).epsilon(1e-6));
  CHECK(rep.ratio2 == doctest::Approx(1.1755).epsilon(1e-4));
  CHECK(rep.in_regime);

  FrequencyVector w(std::vector<double>{0.3, 0.7});
  auto id = pushforward(complete_frame({1, 0}, {0, 1}), w, 0.0);
  CHECK(id.omega_new[0] == w[0]);
  CHECK(id.omega_new[1] == w[1]);

  // linearity on omega_new
  FrequencyVector w1(std::vector<double>{0.25, 1.5}), w2(std::vector<double>{-2.0, 0.125});
  FrequencyVector mix(std::vector<double>{3 * 0.25 - 2 * -2.0, 3 * 1.5 - 2 * 0.125});
  auto p1 = pushforward(f, w1, 0.0), p2 = pushforward(f, w2, 0.0), pm = pushforward(f, mix, 0.0);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(pm.omega_new[i] == p1.omega_new[i] * 3 - p2.omega_new[i] * 2);
}

TEST_CASE("frame record round trip") {
  auto f = complete_frame({1, 1, -2}, {1, 1, 1});
  auto lift = symplectic_lift(f);
  auto text = frame_record(f, lift);
  CHECK(text.find("\"K_inv_T\"") != std::string::npos);
  auto back = frame_from_record(text);
  CHECK(back.rows() == f.rows());
  CHECK(back.det == f.det);
  CHECK_THROWS_AS(frame_from_record("{\"rows\": [[1,1],[1,0]], \"det\": -1}"), DomainError);
}
