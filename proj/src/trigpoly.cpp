#include "ckam/trigpoly.hpp"

#include "ckam/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

namespace ckam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x) {
  double y = std::fmod(x + std::numbers::pi, kTwoPi);
  if (y < 0) y += kTwoPi;
  return y - std::numbers::pi;
}

}  // namespace

// ---------------------------------------------------------------------------
// PeriodicFn

PeriodicFn::PeriodicFn(Jet jet, int smoothness_order,
                       std::optional<std::pair<double, double>> support, std::string name)
    : jet_(std::move(jet)), smoothness_(smoothness_order), support_(support), name_(std::move(name)) {}

double PeriodicFn::derivative(double x, int order) const {
  return jet(x, order)[static_cast<std::size_t>(order)];
}

std::vector<double> PeriodicFn::jet(double x, int order) const {
  if (order < 0 || !has_order(order))
    throw DomainError("PeriodicFn '" + name_ + "': derivative order " + std::to_string(order) +
                      " unavailable");
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  jet_(wrap(x), order, out.data());
  return out;
}

PeriodicFn PeriodicFn::constant(double c) {
  return PeriodicFn(
      [c](double, int order, double* out) {
        out[0] = c;
        for (int i = 1; i <= order; ++i) out[i] = 0.0;
      },
      kInfinite, std::nullopt, "constant");
}

PeriodicFn PeriodicFn::harmonic(double a, double b, int m) {
  return PeriodicFn(
      [a, b, m](double x, int order, double* out) {
        double c = std::cos(m * x), s = std::sin(m * x);
        // d/dx (a cos + b sin) = m (b cos - a sin)
        double ca = a, cb = b;
        for (int i = 0; i <= order; ++i) {
          out[i] = ca * c + cb * s;
          double na = m * cb, nb = -m * ca;
          ca = na;
          cb = nb;
        }
      },
      kInfinite, std::nullopt, "harmonic");
}

PeriodicFn PeriodicFn::combine(double a, const PeriodicFn& f, double b, const PeriodicFn& g) {
  int sm;
  if (f.smoothness_ == kInfinite)
    sm = g.smoothness_;
  else if (g.smoothness_ == kInfinite)
    sm = f.smoothness_;
  else
    sm = std::min(f.smoothness_, g.smoothness_);
  auto fj = f.jet_, gj = g.jet_;
  return PeriodicFn(
      [a, b, fj, gj](double x, int order, double* out) {
        std::vector<double> tmp(static_cast<std::size_t>(order) + 1);
        fj(x, order, out);
        gj(x, order, tmp.data());
        for (int i = 0; i <= order; ++i) out[i] = a * out[i] + b * tmp[static_cast<std::size_t>(i)];
      },
      sm, std::nullopt, "combination");
}

PeriodicFn bump(double R) {
  if (!(R > 0.0) || R > std::numbers::pi) throw DomainError("bump: R must lie in (0, pi]");
  return PeriodicFn(
      [R](double x, int order, double* out) {
        for (int i = 0; i <= order; ++i) out[i] = 0.0;
        double u = x / R;
        double w0 = 1.0 - u * u;
        // Beyond 1/w0 > 700 every derivative is below exp(-700) * poly(1/w0): zero in double.
        if (w0 <= 0.0 || 1.0 / w0 > 700.0) return;
        const std::size_t n = static_cast<std::size_t>(order) + 1;
        // Taylor coefficients in t = u - u0 of w = 1 - u^2, then q = 1/w, then exp(1 - q).
        double w[3] = {w0, -2.0 * u, -1.0};
        std::vector<double> q(n), h(n), e(n);
        q[0] = 1.0 / w0;
        for (std::size_t j = 1; j < n; ++j) {
          double s = 0.0;
          for (std::size_t i = 1; i <= std::min<std::size_t>(j, 2); ++i) s += w[i] * q[j - i];
          q[j] = -s / w0;
        }
        h[0] = 1.0 - q[0];
        for (std::size_t j = 1; j < n; ++j) h[j] = -q[j];
        e[0] = std::numbers::sqrt2 * std::exp(h[0]);
        for (std::size_t j = 1; j < n; ++j) {
          double s = 0.0;
          for (std::size_t i = 1; i <= j; ++i) s += static_cast<double>(i) * h[i] * e[j - i];
          e[j] = s / static_cast<double>(j);
        }
        // f^{(j)}(x) = j! e_j / R^j
        double scale = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
          out[j] = e[j] * scale;
          scale *= static_cast<double>(j + 1) / R;
        }
      },
      PeriodicFn::kInfinite, std::make_pair(-R, R), "bump");
}

// ---------------------------------------------------------------------------
// TrigPoly core

namespace {

// Flip m to its canonical sign; returns -1 if flipped, 0 for m = 0, else 1.
int canonical_sign(long* m, std::size_t d) {
  for (std::size_t i = 0; i < d; ++i) {
    if (m[i] == 0) continue;
    if (m[i] > 0) return 1;
    for (std::size_t j = i; j < d; ++j) m[j] = -m[j];
    return -1;
  }
  return 0;
}

struct Raw {
  std::size_t dim;
  std::vector<long> f;
  std::vector<double> c, s;

  void add(const long* m, double cc, double ss) {
    f.insert(f.end(), m, m + dim);
    int sg = canonical_sign(&f[f.size() - dim], dim);
    c.push_back(cc);
    s.push_back(sg == 0 ? 0.0 : sg * ss);
  }
};

}  // namespace

TrigPoly::TrigPoly(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DomainError("TrigPoly: dim must be >= 1");
}

namespace {

// Sorts, merges duplicates, drops exact zeros. Summation order within a
// frequency follows the input order, so results are deterministic.
void finalize(std::size_t d, std::vector<long>& f, std::vector<double>& c, std::vector<double>& s,
              std::vector<long>& of, std::vector<double>& oc, std::vector<double>& os) {
  const std::size_t n = c.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(&f[a * d], &f[a * d] + d, &f[b * d], &f[b * d] + d);
  });
  of.clear();
  oc.clear();
  os.clear();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    double cc = 0.0, ss = 0.0;
    while (j < n && std::equal(&f[idx[i] * d], &f[idx[i] * d] + d, &f[idx[j] * d])) {
      cc += c[idx[j]];
      ss += s[idx[j]];
      ++j;
    }
    if (cc != 0.0 || ss != 0.0) {
      of.insert(of.end(), &f[idx[i] * d], &f[idx[i] * d] + d);
      oc.push_back(cc);
      os.push_back(ss);
    }
    i = j;
  }
}

}  // namespace

TrigPoly TrigPoly::from_terms(std::size_t dim, const std::vector<Term>& terms) {
  Raw raw{dim, {}, {}, {}};
  for (const auto& t : terms) {
    if (t.freq.size() != dim) throw DomainError("TrigPoly: frequency dimension mismatch");
    if (!std::isfinite(t.cos) || !std::isfinite(t.sin))
      throw DomainError("TrigPoly: non-finite coefficient");
    raw.add(t.freq.data(), t.cos, t.sin);
  }
  TrigPoly p(dim);
  finalize(dim, raw.f, raw.c, raw.s, p.freqs_, p.cos_, p.sin_);
  return p;
}

TrigPoly TrigPoly::constant(std::size_t dim, double c) {
  return from_terms(dim, {Term{IntVec(dim, 0), c, 0.0}});
}

TrigPoly::Term TrigPoly::term(std::size_t i) const {
  return Term{IntVec(freq(i), freq(i) + dim_), cos_[i], sin_[i]};
}

std::vector<TrigPoly::Term> TrigPoly::terms() const {
  std::vector<Term> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(term(i));
  return out;
}

double TrigPoly::degree() const {
  double deg = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    long n2 = 0;
    for (std::size_t j = 0; j < dim_; ++j) n2 += freq(i)[j] * freq(i)[j];
    deg = std::max(deg, std::sqrt(static_cast<double>(n2)));
  }
  return deg;
}

IntVec TrigPoly::max_abs_freq() const {
  IntVec m(dim_, 0);
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < dim_; ++j) m[j] = std::max(m[j], std::labs(freq(i)[j]));
  return m;
}

double TrigPoly::operator()(const double* x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double arg = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) arg += static_cast<double>(freq(i)[j]) * x[j];
    s += cos_[i] * std::cos(arg) + sin_[i] * std::sin(arg);
  }
  return s;
}

double TrigPoly::operator()(double x) const {
  if (dim_ != 1) throw DomainError("TrigPoly: scalar evaluation needs dim 1");
  return (*this)(&x);
}

TrigPoly TrigPoly::derivative(const std::vector<int>& alpha) const {
  if (alpha.size() != dim_) throw DomainError("TrigPoly::derivative: multi-index size mismatch");
  int order = 0;
  for (int a : alpha) {
    if (a < 0) throw DomainError("TrigPoly::derivative: negative order");
    order += a;
  }
  TrigPoly out(dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    double factor = 1.0;
    for (std::size_t j = 0; j < dim_; ++j)
      for (int r = 0; r < alpha[j]; ++r) factor *= static_cast<double>(freq(i)[j]);
    if (factor == 0.0) continue;
    // d/dx cos(theta) = -m sin, d/dx sin = m cos: rotate (c, s) by order quarter turns.
    double c = cos_[i] * factor, s = sin_[i] * factor;
    for (int r = 0; r < order % 4; ++r) {
      double nc = s, ns = -c;
      c = nc;
      s = ns;
    }
    out.freqs_.insert(out.freqs_.end(), freq(i), freq(i) + dim_);
    out.cos_.push_back(c);
    out.sin_.push_back(s);
  }
  return out;
}

TrigPoly TrigPoly::derivative(int s) const {
  if (dim_ != 1) throw DomainError("TrigPoly::derivative(int) needs dim 1");
  return derivative(std::vector<int>{s});
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
  if (o.dim_ != dim_) throw DomainError("TrigPoly: dimension mismatch in +");
  std::vector<long> f = freqs_;
  f.insert(f.end(), o.freqs_.begin(), o.freqs_.end());
  std::vector<double> c = cos_, s = sin_;
  c.insert(c.end(), o.cos_.begin(), o.cos_.end());
  s.insert(s.end(), o.sin_.begin(), o.sin_.end());
  TrigPoly p(dim_);
  finalize(dim_, f, c, s, p.freqs_, p.cos_, p.sin_);
  return p;
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const { return *this + o * -1.0; }

TrigPoly TrigPoly::operator*(double k) const {
  TrigPoly p(dim_);
  if (k == 0.0) return p;
  p = *this;
  for (auto& c : p.cos_) c *= k;
  for (auto& s : p.sin_) s *= k;
  return p;
}

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
  if (o.dim_ != dim_) throw DomainError("TrigPoly: dimension mismatch in *");
  Raw raw{dim_, {}, {}, {}};
  const std::size_t n = size() * o.size() * 2;
  raw.f.reserve(n * dim_);
  raw.c.reserve(n);
  raw.s.reserve(n);
  std::vector<long> m(dim_);
  for (std::size_t i = 0; i < size(); ++i) {
    const double c1 = cos_[i], s1 = sin_[i];
    for (std::size_t j = 0; j < o.size(); ++j) {
      const double c2 = o.cos_[j], s2 = o.sin_[j];
      for (std::size_t t = 0; t < dim_; ++t) m[t] = freq(i)[t] + o.freq(j)[t];
      raw.add(m.data(), 0.5 * (c1 * c2 - s1 * s2), 0.5 * (s1 * c2 + c1 * s2));
      for (std::size_t t = 0; t < dim_; ++t) m[t] = freq(i)[t] - o.freq(j)[t];
      raw.add(m.data(), 0.5 * (c1 * c2 + s1 * s2), 0.5 * (s1 * c2 - c1 * s2));
    }
  }
  TrigPoly p(dim_);
  finalize(dim_, raw.f, raw.c, raw.s, p.freqs_, p.cos_, p.sin_);
  return p;
}

TrigPoly TrigPoly::shifted(std::size_t axis, double shift) const {
  if (axis >= dim_) throw DomainError("TrigPoly::shifted: axis out of range");
  TrigPoly p = *this;
  for (std::size_t i = 0; i < size(); ++i) {
    double phi = static_cast<double>(freq(i)[axis]) * shift;
    // c cos(th + phi) + s sin(th + phi)
    double cp = std::cos(phi), sp = std::sin(phi);
    // exact for integer multiples of pi
    if (std::fabs(shift) == std::numbers::pi) {
      cp = (freq(i)[axis] % 2 == 0) ? 1.0 : -1.0;
      sp = 0.0;
    }
    p.cos_[i] = cos_[i] * cp + sin_[i] * sp;
    p.sin_[i] = sin_[i] * cp - cos_[i] * sp;
  }
  return p;
}

TrigPoly TrigPoly::tensor(const TrigPoly& a, const TrigPoly& b) {
  if (a.dim_ != 1 || b.dim_ != 1) throw DomainError("TrigPoly::tensor: needs 1-variable factors");
  return a.substitute({{1, 0}}) * b.substitute({{0, 1}});
}

TrigPoly TrigPoly::substitute(const std::vector<IntVec>& rows) const {
  if (rows.size() != dim_) throw DomainError("TrigPoly::substitute: need one row per variable");
  const std::size_t nd = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != nd) throw DomainError("TrigPoly::substitute: ragged rows");
  Raw raw{nd, {}, {}, {}};
  raw.f.reserve(size() * nd);
  raw.c.reserve(size());
  raw.s.reserve(size());
  std::vector<long> m(nd);
  for (std::size_t i = 0; i < size(); ++i) {
    std::fill(m.begin(), m.end(), 0);
    for (std::size_t j = 0; j < dim_; ++j)
      for (std::size_t t = 0; t < nd; ++t) m[t] += freq(i)[j] * rows[j][t];
    raw.add(m.data(), cos_[i], sin_[i]);
  }
  TrigPoly p(nd);
  finalize(nd, raw.f, raw.c, raw.s, p.freqs_, p.cos_, p.sin_);
  return p;
}

std::string TrigPoly::to_json() const {
  std::string out;
  char buf[64];
  out += "{\"dim\": " + std::to_string(dim_) + ", ";
  std::snprintf(buf, sizeof buf, "%.17g", degree());
  out += "\"degree\": " + std::string(buf) + ", \"terms\": [";
  for (std::size_t i = 0; i < size(); ++i) {
    out += i ? ",\n  {\"freq\": [" : "\n  {\"freq\": [";
    for (std::size_t j = 0; j < dim_; ++j) {
      if (j) out += ", ";
      out += std::to_string(freq(i)[j]);
    }
    std::snprintf(buf, sizeof buf, "%.17g", cos_[i]);
    out += "], \"cos\": " + std::string(buf);
    std::snprintf(buf, sizeof buf, "%.17g", sin_[i]);
    out += ", \"sin\": " + std::string(buf) + "}";
  }
  out += size() ? "\n]}\n" : "]}\n";
  return out;
}

TrigPoly TrigPoly::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    std::size_t dim = j.at("dim").get<std::size_t>();
    std::vector<Term> terms;
    for (const auto& t : j.at("terms"))
      terms.push_back(Term{t.at("freq").get<IntVec>(), t.at("cos").get<double>(),
                           t.at("sin").get<double>()});
    return from_terms(dim, terms);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("TrigPoly json: ") + e.what());
  }
}

}  // namespace ckam
