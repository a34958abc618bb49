#include "ckam/resonance_frame.hpp"

#include "ckam/error.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ckam {

namespace {

long to_long_checked(const BigInt& x) {
  if (x > std::numeric_limits<long>::max() || x < std::numeric_limits<long>::min())
    throw DomainError("integer entry overflows 64 bits");
  return x.convert_to<long>();
}

void sign_normalize(IntVec& v) {
  for (long x : v) {
    if (x == 0) continue;
    if (x < 0)
      for (long& y : v) y = -y;
    return;
  }
}

IntVec make_primitive(IntVec v) {
  long g = 0;
  for (long x : v) g = std::gcd(g, x);
  if (g > 1)
    for (long& x : v) x /= g;
  return v;
}

bool is_zero(const IntVec& v) {
  return std::all_of(v.begin(), v.end(), [](long x) { return x == 0; });
}

}  // namespace

std::vector<IntVec> ResonanceFrame::rows() const {
  std::vector<IntVec> r{k, k_prime};
  r.insert(r.end(), fill_rows.begin(), fill_rows.end());
  return r;
}

// ---------------------------------------------------------------------------
// partner search

namespace {

struct Candidate {
  IntVec k;
  BigFloat value;  // |<k',w>|
  long n2 = 0;
  bool valid = false;
};

// a beats b: larger |v|/|k'|, then lexicographically smaller.
bool better(const Candidate& a, const Candidate& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  BigFloat lhs = a.value * a.value * b.n2;
  BigFloat rhs = b.value * b.value * a.n2;
  if (lhs > rhs) return true;
  if (rhs > lhs) return false;
  return a.k < b.k;
}

void partner_range(const IntVec& k, const FrequencyVector& omega, long box, double r2max, long lo,
                   long hi, Candidate& best) {
  const std::size_t d = k.size();
  const long side = 2 * box + 1;
  IntVec c(d);
  for (long idx = lo; idx < hi; ++idx) {
    long r = idx;
    for (std::size_t i = d; i-- > 0;) {
      c[i] = r % side - box;
      r /= side;
    }
    std::size_t f = 0;
    while (f < d && c[f] == 0) ++f;
    if (f == d || c[f] < 0) continue;
    if (dot(c, k) != 0) continue;
    long n2 = norm_squared(c);
    if (static_cast<double>(n2) > r2max) continue;
    Candidate cand{c, abs(small_denominator(omega, c)), n2, true};
    if (better(cand, best)) best = std::move(cand);
  }
}

}  // namespace

IntVec orthogonal_partner(const IntVec& k, const FrequencyVector& omega, double search_radius,
                          Exec exec) {
  const std::size_t d = k.size();
  if (d != omega.dim()) throw DomainError("orthogonal_partner: dimension mismatch");
  if (is_zero(k)) throw DomainError("orthogonal_partner: k = 0");
  if (!(search_radius > 0.0)) throw DomainError("orthogonal_partner: search radius must be positive");
  if (d == 2) {
    IntVec kp{-k[1], k[0]};
    sign_normalize(kp);
    return kp;
  }
  const double kn = norm(k);
  const long box = static_cast<long>(std::ceil(search_radius * kn));
  // tiny relative slack so |k'| = r|k| exactly is not lost to rounding
  const double r2max = search_radius * search_radius * static_cast<double>(norm_squared(k)) * (1 + 1e-12);
  long total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (total > std::numeric_limits<long>::max() / (2 * box + 1))
      throw DomainError("orthogonal_partner: search box too large");
    total *= 2 * box + 1;
  }
  Candidate best;
  if (exec == Exec::kSerial) {
    partner_range(k, omega, box, r2max, 0, total, best);
  } else {
    const int nt = worker_threads();
    std::vector<Candidate> part(static_cast<std::size_t>(nt));
#pragma omp parallel num_threads(nt)
    {
      const int t = omp_get_thread_num(), n = omp_get_num_threads();
      partner_range(k, omega, box, r2max, total * t / n, total * (t + 1) / n,
                    part[static_cast<std::size_t>(t)]);
    }
    for (auto& c : part)
      if (better(c, best)) best = std::move(c);
  }
  if (!best.valid) throw PartnerQualityError("no orthogonal partner in the search box", {}, 0.0);
  if (best.value.to_double() < kn / 8.0)
    throw PartnerQualityError("partner quality failure: best |<k',w>| = " +
                                  std::to_string(best.value.to_double()) + " < |k|/8",
                              best.k, best.value.to_double());
  return best.k;
}

// ---------------------------------------------------------------------------
// frame completion

std::vector<IntVec> integer_kernel(const std::vector<IntVec>& a) {
  if (a.empty()) throw DomainError("integer_kernel: empty matrix");
  const std::size_t d = a[0].size();
  const std::size_t m = a.size();
  std::vector<std::vector<BigInt>> w(m, std::vector<BigInt>(d));
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != d) throw DomainError("integer_kernel: ragged matrix");
    for (std::size_t j = 0; j < d; ++j) w[i][j] = a[i][j];
  }
  std::vector<std::vector<BigInt>> u(d, std::vector<BigInt>(d));
  for (std::size_t j = 0; j < d; ++j) u[j][j] = 1;
  auto col_axpy = [&](std::size_t dst, std::size_t src, const BigInt& q) {
    for (std::size_t i = 0; i < m; ++i) w[i][dst] -= q * w[i][src];
    for (std::size_t i = 0; i < d; ++i) u[i][dst] -= q * u[i][src];
  };
  auto col_swap = [&](std::size_t x, std::size_t y) {
    for (std::size_t i = 0; i < m; ++i) std::swap(w[i][x], w[i][y]);
    for (std::size_t i = 0; i < d; ++i) std::swap(u[i][x], u[i][y]);
  };
  std::size_t p = 0;
  for (std::size_t i = 0; i < m && p < d; ++i) {
    for (std::size_t c = p + 1; c < d; ++c) {
      while (w[i][c] != 0) {
        BigInt q = w[i][p] / w[i][c];
        col_axpy(p, c, q);
        col_swap(p, c);
      }
    }
    if (w[i][p] != 0) ++p;
  }
  std::vector<IntVec> basis;
  for (std::size_t c = p; c < d; ++c) {
    IntVec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = to_long_checked(u[i][c]);
    basis.push_back(std::move(v));
  }
  return basis;
}

namespace {

IntVec cross(const IntVec& a, const IntVec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Gram-Schmidt over Q, then each vector scaled to a primitive integer vector.
std::vector<IntVec> orthogonalize(const std::vector<IntVec>& basis) {
  std::vector<std::vector<Rational>> us;
  std::vector<IntVec> out;
  for (const auto& b : basis) {
    std::vector<Rational> v(b.begin(), b.end());
    for (const auto& u : us) {
      Rational num = 0, den = 0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        num += Rational(b[i]) * u[i];
        den += u[i] * u[i];
      }
      Rational c = num / den;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * u[i];
    }
    BigInt l = 1;
    for (const auto& x : v) l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(x));
    IntVec iv(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      Rational s = v[i] * Rational(l);
      iv[i] = to_long_checked(boost::multiprecision::numerator(s));
    }
    iv = make_primitive(iv);
    sign_normalize(iv);
    us.push_back(std::move(v));
    out.push_back(std::move(iv));
  }
  return out;
}

}  // namespace

ResonanceFrame complete_frame(const IntVec& k, const IntVec& k_prime, FillMethod method) {
  const std::size_t d = k.size();
  if (d < 2 || k_prime.size() != d) throw DomainError("complete_frame: dimension mismatch");
  if (is_zero(k) || is_zero(k_prime)) throw DomainError("complete_frame: zero row");
  if (dot(k, k_prime) != 0) throw DomainError("complete_frame: <k,k'> != 0");
  ResonanceFrame f;
  f.k = k;
  f.k_prime = k_prime;
  bool use_cross = d == 3 && method != FillMethod::kKernel;
  if (method == FillMethod::kCross && d != 3) throw DomainError("cross-product fill needs d = 3");
  if (use_cross) {
    f.fill_rows.push_back(make_primitive(cross(k, k_prime)));
  } else if (d > 2) {
    auto ker = integer_kernel({k, k_prime});
    if (ker.size() != d - 2) throw DomainError("complete_frame: k and k' are dependent");
    f.fill_rows = orthogonalize(ker);
  }
  Rational det = determinant(to_rational(f.rows()));
  if (det == 0) throw DomainError("complete_frame: singular frame");
  f.det = boost::multiprecision::numerator(det);
  return f;
}

// ---------------------------------------------------------------------------
// exact linear algebra

RatMatrix to_rational(const std::vector<IntVec>& m) {
  RatMatrix r;
  for (const auto& row : m) r.emplace_back(row.begin(), row.end());
  return r;
}

RatMatrix transpose(const RatMatrix& m) {
  if (m.empty()) return m;
  RatMatrix t(m[0].size(), std::vector<Rational>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

RatMatrix multiply(const RatMatrix& a, const RatMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  RatMatrix c(n, std::vector<Rational>(m));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != k) throw DomainError("multiply: shape mismatch");
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
    }
  }
  return c;
}

Rational determinant(const RatMatrix& m0) {
  RatMatrix m = m0;
  const std::size_t n = m.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m[r][c] == 0) continue;
      Rational f = m[r][c] / m[c][c];
      for (std::size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return det;
}

RatMatrix inverse(const RatMatrix& m0) {
  const std::size_t n = m0.size();
  RatMatrix m = m0;
  RatMatrix inv(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i].size() != n) throw DomainError("inverse: matrix not square");
    inv[i][i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) throw DomainError("inverse: singular matrix");
    std::swap(m[p], m[c]);
    std::swap(inv[p], inv[c]);
    Rational piv = m[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      m[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m[r][c] == 0) continue;
      Rational f = m[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        m[r][j] -= f * m[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

bool is_symplectic(const RatMatrix& phi) {
  const std::size_t n2 = phi.size();
  if (n2 % 2 != 0) return false;
  const std::size_t d = n2 / 2;
  RatMatrix j(n2, std::vector<Rational>(n2));
  for (std::size_t i = 0; i < d; ++i) {
    j[i][d + i] = 1;
    j[d + i][i] = -1;
  }
  return multiply(multiply(transpose(phi), j), phi) == j;
}

RatMatrix SymplecticLift::phi() const {
  const std::size_t d = K.size();
  RatMatrix p(2 * d, std::vector<Rational>(2 * d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      p[i][j] = K[i][j];
      p[d + i][d + j] = K_inv_T[i][j];
    }
  return p;
}

SymplecticLift symplectic_lift(const RatMatrix& K) {
  SymplecticLift lift;
  lift.K = K;
  lift.K_inv_T = transpose(inverse(K));
  if (!is_symplectic(lift.phi())) throw DomainError("symplectic_lift: exact check failed");
  lift.verified = true;
  return lift;
}

SymplecticLift symplectic_lift(const ResonanceFrame& frame) {
  return symplectic_lift(to_rational(frame.rows()));
}

// ---------------------------------------------------------------------------

PushforwardReport pushforward(const ResonanceFrame& frame, const FrequencyVector& omega, double tau,
                              const RegimeThresholds& th) {
  if (frame.dim() != omega.dim()) throw DomainError("pushforward: dimension mismatch");
  PushforwardReport rep{omega.transformed(frame.rows()), 0.0, 0.0, false};
  const double kn = norm(frame.k);
  const double d = static_cast<double>(frame.dim());
  rep.bound1 = std::fabs(rep.omega_new[0].to_double()) * std::pow(kn, d + tau - 1.0);
  rep.ratio2 = std::fabs(rep.omega_new[1].to_double()) / kn;
  rep.in_regime = rep.bound1 <= th.bound1_max && rep.ratio2 >= th.ratio2_min &&
                  rep.ratio2 <= th.ratio2_max;
  return rep;
}

std::string frame_record(const ResonanceFrame& frame, const SymplecticLift& lift) {
  nlohmann::ordered_json j;
  j["dimension"] = frame.dim();
  j["rows"] = frame.rows();
  j["det"] = to_long_checked(frame.det);
  auto rat = nlohmann::json::array();
  for (const auto& row : lift.K_inv_T) {
    auto r = nlohmann::json::array();
    for (const auto& x : row)
      r.push_back({to_long_checked(boost::multiprecision::numerator(x)),
                   to_long_checked(boost::multiprecision::denominator(x))});
    rat.push_back(r);
  }
  j["K_inv_T"] = rat;
  j["symplectic_check"] = lift.verified;
  return j.dump(2);
}

ResonanceFrame frame_from_record(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("frame record: ") + e.what());
  }
  auto rows = j.at("rows").get<std::vector<IntVec>>();
  if (rows.size() < 2) throw DomainError("frame record: fewer than two rows");
  ResonanceFrame f;
  f.k = rows[0];
  f.k_prime = rows[1];
  f.fill_rows.assign(rows.begin() + 2, rows.end());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    if (rows[a].size() != rows.size()) throw DomainError("frame record: matrix not square");
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      if (dot(rows[a], rows[b]) != 0) throw DomainError("frame record: rows not orthogonal");
  }
  f.det = boost::multiprecision::numerator(determinant(to_rational(rows)));
  if (f.det == 0 || f.det != j.at("det").get<long>())
    throw DomainError("frame record: det does not match rows");
  return f;
}

}  // namespace ckam
