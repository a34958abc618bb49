#include "ckam/diophantine.hpp"

#include "ckam/error.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ckam {

long dot(const IntVec& a, const IntVec& b) {
  if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
  long s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

long norm_squared(const IntVec& k) { return dot(k, k); }

double norm(const IntVec& k) { return std::sqrt(static_cast<double>(norm_squared(k))); }

long sup_norm(const IntVec& k) {
  long m = 0;
  for (long x : k) m = std::max(m, std::labs(x));
  return m;
}

// ---------------------------------------------------------------------------
// FrequencyVector

namespace {

BigFloat parse_entry(const std::string& raw, unsigned bits) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigFloat num(s.substr(0, slash), bits);
    BigFloat den(s.substr(slash + 1), bits);
    if (den.is_zero()) throw DomainError("frequency entry has zero denominator: " + raw);
    return num / den;
  }
  try {
    return BigFloat(s, bits);
  } catch (const std::invalid_argument&) {
    throw DomainError("cannot parse frequency entry '" + raw + "'");
  }
}

BigFloat golden_mean(unsigned bits) {
  BigFloat five(5L, bits);
  return (sqrt(five) - BigFloat(1L, bits)) / BigFloat(2L, bits);
}

}  // namespace

FrequencyVector::FrequencyVector(const std::vector<double>& entries, unsigned bits)
    : label_("explicit"), bits_(bits) {
  auto copy = entries;
  gen_ = std::make_shared<const Generator>(
      [copy](std::size_t i, unsigned b) { return BigFloat(copy[i], b); });
  for (std::size_t i = 0; i < entries.size(); ++i) entries_.push_back((*gen_)(i, bits));
  validate();
}

FrequencyVector::FrequencyVector(std::size_t dim, Generator gen, std::string label, unsigned bits)
    : gen_(std::make_shared<const Generator>(std::move(gen))), label_(std::move(label)), bits_(bits) {
  for (std::size_t i = 0; i < dim; ++i) entries_.push_back((*gen_)(i, bits));
  validate();
}

void FrequencyVector::validate() const {
  if (entries_.size() < 2) throw DomainError("FrequencyVector needs d >= 2");
  bool any = false;
  for (const auto& e : entries_) {
    if (!e.is_finite()) throw DomainError("FrequencyVector entries must be finite");
    any = any || !e.is_zero();
  }
  if (!any) throw DomainError("FrequencyVector entries are all zero");
}

FrequencyVector FrequencyVector::golden(unsigned bits) {
  return FrequencyVector(
      2, [](std::size_t i, unsigned b) { return i == 0 ? BigFloat(1L, b) : golden_mean(b); },
      "golden", bits);
}

FrequencyVector FrequencyVector::spread(std::size_t d, unsigned bits) {
  if (d < 2) throw DomainError("spread preset needs d >= 2");
  long dl = static_cast<long>(d);
  return FrequencyVector(
      d,
      [dl](std::size_t i, unsigned b) {
        return rational_power(BigFloat(2L, b), static_cast<long>(i), dl);
      },
      "spread-" + std::to_string(d), bits);
}

FrequencyVector FrequencyVector::liouville_demo(unsigned bits) {
  return FrequencyVector(
      2,
      [](std::size_t i, unsigned b) {
        if (i == 0) return BigFloat(1L, b);
        BigFloat s(b);
        long fact = 1;
        for (long j = 1; j <= 4; ++j) {
          fact *= j;
          s += pow10(-fact, b);
        }
        return s;
      },
      "liouville-demo", bits);
}

FrequencyVector FrequencyVector::parse(const std::string& text, unsigned bits) {
  if (text == "golden") return golden(bits);
  if (text == "liouville-demo") return liouville_demo(bits);
  if (text.rfind("spread-", 0) == 0) {
    std::size_t d = 0;
    try {
      d = std::stoul(text.substr(7));
    } catch (const std::exception&) {
      throw DomainError("bad preset '" + text + "'");
    }
    return spread(d, bits);
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  for (const auto& p : parts) parse_entry(p, bits);  // fail early with the offending entry
  return FrequencyVector(
      parts.size(), [parts](std::size_t i, unsigned b) { return parse_entry(parts[i], b); }, text,
      bits);
}

std::vector<double> FrequencyVector::approx() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.to_double());
  return out;
}

FrequencyVector FrequencyVector::at_precision(unsigned bits) const {
  FrequencyVector r(*this);
  r.bits_ = bits;
  for (std::size_t i = 0; i < entries_.size(); ++i) r.entries_[i] = (*gen_)(i, bits);
  return r;
}

FrequencyVector FrequencyVector::transformed(const std::vector<IntVec>& rows) const {
  for (const auto& r : rows)
    if (r.size() != dim()) throw DomainError("transformed: dimension mismatch");
  auto base = gen_;
  auto d = dim();
  auto mat = rows;
  return FrequencyVector(
      rows.size(),
      [base, d, mat](std::size_t i, unsigned b) {
        BigFloat s(b);
        for (std::size_t j = 0; j < d; ++j) s += (*base)(j, b) * mat[i][j];
        return s;
      },
      "K(" + label_ + ")", bits_);
}

// ---------------------------------------------------------------------------
// continued fractions

std::vector<long> cf_expand(const BigFloat& x, std::size_t n_terms) {
  if (!x.is_finite()) throw DomainError("cf_expand: non-finite input");
  if (n_terms == 0) throw DomainError("cf_expand: n_terms must be >= 1");
  const unsigned bits = x.precision();
  // Remainders below this are rounding noise.
  BigFloat tol(std::ldexp(1.0, -static_cast<int>(bits / 2)), bits);
  std::vector<long> out;
  BigFloat y = x;
  while (out.size() < n_terms) {
    BigFloat a = floor(y);
    BigFloat r = round(y);
    if (abs(y - r) < tol) a = r;
    out.push_back(to_long(a));
    BigFloat frac = y - a;
    if (abs(frac) < tol) break;
    y = BigFloat(1L, bits) / frac;
  }
  return out;
}

std::vector<long> cf_expand(double x, std::size_t n_terms) {
  if (!std::isfinite(x)) throw DomainError("cf_expand: non-finite input");
  return cf_expand(BigFloat(x, 53), n_terms);
}

// ---------------------------------------------------------------------------
// small denominators and resonance search

BigFloat small_denominator(const FrequencyVector& omega, const IntVec& k) {
  if (k.size() != omega.dim()) throw DomainError("small_denominator: dimension mismatch");
  if (std::all_of(k.begin(), k.end(), [](long x) { return x == 0; }))
    throw DomainError("small_denominator: k = 0");
  BigFloat s(omega.precision());
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k[i] != 0) s += omega[i] * k[i];
  return s;
}

double effective_tau(const BigFloat& value, double k_norm, std::size_t d) {
  if (value.is_zero()) return std::numeric_limits<double>::infinity();
  BigFloat a = abs(value);
  if (!(a < BigFloat(1L, a.precision()))) return -std::numeric_limits<double>::infinity();
  double lk = std::log(k_norm);
  if (lk <= 0.0) return std::numeric_limits<double>::infinity();
  return -log(a).to_double() / lk - static_cast<double>(d - 1);
}

namespace {

// |v| < c / |k|^{d-1}  <=>  v^2 |k|^{2(d-1)} < c^2, evaluated at the precision of v.
bool passes(const BigFloat& v, long n2, std::size_t d, double c) {
  unsigned b = v.precision();
  BigFloat lhs = v * v;
  BigFloat nk(n2, b);
  for (std::size_t i = 1; i < d; ++i) lhs = lhs * nk;
  BigFloat cc(c, b);
  return lhs < cc * cc;
}

ResonanceHit make_hit(const FrequencyVector& omega, IntVec k) {
  ResonanceHit h;
  h.value = small_denominator(omega, k);
  h.norm = norm(k);
  h.tau_eff = effective_tau(h.value, h.norm, omega.dim());
  if (h.value.is_zero())
    h.kind = HitKind::kResonant;
  else if (h.tau_eff == -std::numeric_limits<double>::infinity())
    h.kind = HitKind::kNonHit;
  h.k = std::move(k);
  return h;
}

bool hit_order(const ResonanceHit& a, const ResonanceHit& b) {
  long na = norm_squared(a.k), nb = norm_squared(b.k);
  if (na != nb) return na < nb;
  return a.k < b.k;
}

// Scans prefixes [lo, hi) of the box [-K, K]^{d-1}; the last coordinate runs
// in the inner loop. Appends confirmed hits.
void scan_range(const FrequencyVector& omega, const std::vector<double>& w, long k_max, double c,
                long lo, long hi, std::vector<ResonanceHit>& out) {
  const std::size_t d = w.size();
  const long side = 2 * k_max + 1;
  const double eps = static_cast<double>(d + 2) * std::ldexp(1.0, -52);
  const double half_pow = 0.5 * static_cast<double>(d - 1);
  const double wl = w[d - 1];
  IntVec k(d);
  for (long idx = lo; idx < hi; ++idx) {
    long r = idx;
    for (std::size_t i = d - 1; i-- > 0;) {
      k[i] = r % side - k_max;
      r /= side;
    }
    // canonical representative: first nonzero entry positive
    std::size_t f = 0;
    while (f + 1 < d && k[f] == 0) ++f;
    long last_lo = -k_max;
    if (f + 1 < d) {
      if (k[f] < 0) continue;
    } else {
      last_lo = 1;
    }
    double v0 = 0.0, mag0 = 0.0;
    long n0 = 0;
    for (std::size_t i = 0; i + 1 < d; ++i) {
      double t = static_cast<double>(k[i]) * w[i];
      v0 += t;
      mag0 += std::fabs(t);
      n0 += k[i] * k[i];
    }
    for (long kl = last_lo; kl <= k_max; ++kl) {
      double t = static_cast<double>(kl) * wl;
      double v = v0 + t;
      long n2 = n0 + kl * kl;
      double thr = c / std::pow(static_cast<double>(n2), half_pow);
      // Generous margin: the double filter may only produce false positives.
      if (std::fabs(v) - eps * (mag0 + std::fabs(t)) - 1e-12 * thr >= thr) continue;
      k[d - 1] = kl;
      BigFloat vb = small_denominator(omega, k);
      if (passes(vb, n2, d, c)) out.push_back(make_hit(omega, k));
    }
  }
}

}  // namespace

std::vector<ResonanceHit> find_resonances(const FrequencyVector& omega, long k_max, double c,
                                          Exec exec) {
  if (k_max < 1) throw DomainError("find_resonances: k_max must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("find_resonances: C must be positive");
  const std::size_t d = omega.dim();
  const long side = 2 * k_max + 1;
  long total = 1;  // number of prefixes
  for (std::size_t i = 0; i + 1 < d; ++i) {
    if (total > std::numeric_limits<long>::max() / side)
      throw DomainError("find_resonances: scan box too large");
    total *= side;
  }
  const auto w = omega.approx();
  std::vector<ResonanceHit> hits;
  if (exec == Exec::kSerial) {
    scan_range(omega, w, k_max, c, 0, total, hits);
  } else {
    const int nt = worker_threads();
    std::vector<std::vector<ResonanceHit>> parts(static_cast<std::size_t>(nt));
#pragma omp parallel num_threads(nt)
    {
      const int t = omp_get_thread_num();
      const int n = omp_get_num_threads();
      long lo = total * t / n, hi = total * (t + 1) / n;
      scan_range(omega, w, k_max, c, lo, hi, parts[static_cast<std::size_t>(t)]);
    }
    for (auto& p : parts)
      for (auto& h : p) hits.push_back(std::move(h));
  }
  std::sort(hits.begin(), hits.end(), hit_order);
  return hits;
}

bool verify_hit(const FrequencyVector& omega, const ResonanceHit& hit, double c) {
  BigFloat v = small_denominator(omega, hit.k);
  return passes(v, norm_squared(hit.k), omega.dim(), c);
}

// ---------------------------------------------------------------------------
// classification

namespace {

struct Point {
  double x, y;  // ln|k|, -ln|v|
};

// Best approximations among the hits: strictly smaller |v| than every hit of
// smaller norm. Hits outside the list have |v| >= 1/|k|^{d-1} and never beat a hit.
std::vector<Point> records(const std::vector<ResonanceHit>& hits, long bound) {
  std::vector<Point> pts;
  BigFloat best;
  bool have = false;
  for (const auto& h : hits) {
    if (h.kind != HitKind::kNearResonant || sup_norm(h.k) > bound || h.norm < 2.0) continue;
    BigFloat a = abs(h.value);
    if (have && !(a < best)) continue;
    best = a;
    have = true;
    pts.push_back({std::log(h.norm), -log(a).to_double()});
  }
  return pts;
}

double slope(const std::vector<Point>& p) {
  double mx = 0, my = 0;
  for (const auto& q : p) {
    mx += q.x;
    my += q.y;
  }
  mx /= static_cast<double>(p.size());
  my /= static_cast<double>(p.size());
  double sxy = 0, sxx = 0;
  for (const auto& q : p) {
    sxy += (q.x - mx) * (q.y - my);
    sxx += (q.x - mx) * (q.x - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

DiophantineProfile classify(const FrequencyVector& omega, long k_max, double growth_margin) {
  if (k_max < 2) throw DomainError("classify: k_max must be >= 2");
  DiophantineProfile prof;
  prof.scan_bound = k_max;
  prof.hits = find_resonances(omega, k_max, 1.0);
  const double floor_beta = static_cast<double>(omega.dim() - 1);
  for (const auto& h : prof.hits) prof.resonant = prof.resonant || h.kind == HitKind::kResonant;

  auto pts = records(prof.hits, k_max);
  if (pts.size() >= 2)
    prof.beta_raw = slope(pts);
  else if (pts.size() == 1)
    prof.beta_raw = pts[0].y / pts[0].x;
  else
    prof.beta_raw = floor_beta;
  prof.beta_est = std::max(floor_beta, prof.beta_raw);

  // Dyadic sub-scans, reported from the smallest bound up. A single record
  // gives no trend, so those scales are skipped.
  std::vector<long> bounds;
  for (long b = k_max; b >= 2; b /= 2) bounds.push_back(b);
  std::reverse(bounds.begin(), bounds.end());
  std::vector<double> trend;
  for (long b : bounds) {
    auto p = records(prof.hits, b);
    if (p.size() < 2) continue;
    double s = slope(p);
    prof.sub_scans.emplace_back(b, s);
    trend.push_back(s);
  }
  bool monotone = trend.size() >= 3;
  for (std::size_t i = 1; monotone && i < trend.size(); ++i) monotone = trend[i] >= trend[i - 1];
  prof.liouville_flag = monotone && !prof.resonant && trend.back() - trend.front() > growth_margin;
  return prof;
}

}  // namespace ckam
