#include "ckam/error.hpp"
#include "ckam/trigpoly.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace ckam {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct KernelShape {
  int p;
  int m;
};

KernelShape shape(int M, int kappa) {
  if (M < 1) throw DomainError("jackson: M must be >= 1");
  if (kappa < 2) throw DomainError("jackson: kappa must be >= 2");
  int p = (kappa + 3) / 2;  // ceil((kappa + 2) / 2)
  return {p, M};
}

struct Kernel {
  std::vector<long double> lam;  // lambda_j, j = 0..p(m-1), lambda_0 = 1
  long double log_c0;            // log of the unnormalized central coefficient
};

// (sin(mt/2)/sin(t/2))^2 has Fourier coefficients m - |j|, so the kernel's
// are the p-fold self-convolution of that triangle.
Kernel kernel_coefficients(int p, int m) {
  std::vector<long double> c{1.0L};
  long double log_scale = 0.0L;
  for (int r = 0; r < p; ++r) {
    std::vector<long double> next(c.size() + 2 * static_cast<std::size_t>(m - 1), 0.0L);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (int j = -(m - 1); j <= m - 1; ++j)
        next[i + static_cast<std::size_t>(j + m - 1)] += c[i] * static_cast<long double>(m - std::abs(j));
    long double mx = 0;
    for (auto x : next) mx = std::max(mx, x);
    for (auto& x : next) x /= mx;
    log_scale += std::log(mx);
    c.swap(next);
  }
  const std::size_t mid = (c.size() - 1) / 2;
  std::vector<long double> lam(mid + 1);
  for (std::size_t j = 0; j <= mid; ++j) lam[j] = c[mid + j] / c[mid];
  return {lam, std::log(c[mid]) + log_scale};
}

std::size_t sample_count(int M, int p) {
  std::size_t need = std::max<std::size_t>(4096, 8 * static_cast<std::size_t>(M) * p);
  std::size_t n = 1;
  while (n < need) n <<= 1;
  return n;
}

// Exact for constant input: pairwise sum of a power-of-two count of equal values.
double pairwise_mean(const std::vector<double>& v) {
  std::vector<double> a = v;
  std::size_t n = a.size();
  while (n > 1) {
    std::size_t h = n / 2;
    for (std::size_t i = 0; i < h; ++i) a[i] = a[2 * i] + a[2 * i + 1];
    if (n % 2) a[h++] = a[n - 1];
    n = h;
  }
  return a[0] / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> jackson_multiplier(int M, int kappa) {
  auto [p, m] = shape(M, kappa);
  auto lam = kernel_coefficients(p, m).lam;
  return std::vector<double>(lam.begin(), lam.begin() + M + 1);
}

double jackson_moment(int M, int kappa, int order) {
  auto [p, m] = shape(M, kappa);
  const long double log_c0 = kernel_coefficients(p, m).log_c0;
  // Closed form of the kernel: positive, so the tail keeps full relative accuracy.
  const std::size_t n = 2 * std::max<std::size_t>(4000, 40 * static_cast<std::size_t>(p * m));
  const long double h = std::numbers::pi_v<long double> / static_cast<long double>(n);
  // K(0) = m^{2p} / c0; the node vanishes once order > 0.
  long double acc = order == 0 ? std::exp(2 * p * std::log(static_cast<long double>(m)) - log_c0) : 0.0L;
  for (std::size_t i = 1; i <= n; ++i) {
    long double t = h * static_cast<long double>(i);
    long double ratio = std::fabs(std::sin(m * t / 2) / std::sin(t / 2));
    long double k = std::exp(2 * p * std::log(ratio) - log_c0 + order * std::log(t));
    long double w = (i == n) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    acc += w * k;
  }
  // (1/2pi) int_{-pi}^{pi} = (1/pi) int_0^pi
  return static_cast<double>(acc * h / 3.0L / std::numbers::pi_v<long double>);
}

double jackson_tail(int M, int kappa) {
  auto [p, m] = shape(M, kappa);
  auto lam = kernel_coefficients(p, m).lam;
  long double s = 0.0L;
  for (std::size_t j = static_cast<std::size_t>(M) + 1; j < lam.size(); ++j)
    s += lam[j] * std::pow(static_cast<long double>(j), -kappa);
  return static_cast<double>(2.0L * s);
}

TrigPoly jackson_from_samples(const std::vector<double>& samples, int M, int kappa) {
  const std::size_t n = samples.size();
  if (n < 2 || (n & (n - 1)) != 0) throw DomainError("jackson: sample count must be a power of two");
  if (n < 2 * static_cast<std::size_t>(M) + 2) throw DomainError("jackson: too few samples");
  auto mu = jackson_multiplier(M, kappa);
  const double mean = pairwise_mean(samples);
  std::vector<double> in(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = samples[i] - mean;
  std::vector<fftw_complex> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<TrigPoly::Term> terms;
  terms.push_back({{0}, mean * mu[0], 0.0});
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 1; j <= static_cast<std::size_t>(M); ++j) {
    if (mu[j] == 0.0) continue;
    double re = out[j][0] * inv, im = out[j][1] * inv;
    terms.push_back({{static_cast<long>(j)}, 2.0 * re * mu[j], -2.0 * im * mu[j]});
  }
  return TrigPoly::from_terms(1, terms);
}

JacksonResult jackson(const PeriodicFn& f, int M, int kappa) {
  if (!f.has_order(kappa))
    throw DomainError("jackson: f is not C^" + std::to_string(kappa));
  const int p = shape(M, kappa).p;
  JacksonResult res;
  res.p = p;
  res.samples = sample_count(M, p);
  std::vector<double> s(res.samples);
  const double h = 2.0 * std::numbers::pi / static_cast<double>(res.samples);
  for (std::size_t i = 0; i < res.samples; ++i) s[i] = f(h * static_cast<double>(i));
  res.poly = jackson_from_samples(s, M, kappa);

  // Enough grid points to resolve a narrow support.
  std::size_t grid = 4096;
  if (f.support()) {
    double width = f.support()->second - f.support()->first;
    while (static_cast<double>(grid) * width / (2.0 * std::numbers::pi) < 2048.0) grid <<= 1;
  }
  res.f_norm = holder_norm(f, kappa, grid).value;
  // |f - K*f| <= (1/2) int K t^2 ||f''|| for the even positive kernel, and the
  // dropped frequencies j > M cost at most 2 sum lambda_j |f_j| <= 2 sum lambda_j j^-kappa ||f^(kappa)||.
  // Both derivative norms are dominated by ||f||_{C^kappa}.
  double c = 0.5 * jackson_moment(M, kappa, 2) + jackson_tail(M, kappa);
  res.kernel_constant = std::pow(static_cast<double>(M), kappa) * c;
  res.error_bound = c * res.f_norm;
  return res;
}

std::vector<double> sample_values(const TrigPoly& p, std::size_t n) {
  if (p.dim() != 1) throw DomainError("sample_values: needs a one-variable polynomial");
  if (n < 2 || (n & (n - 1)) != 0) throw DomainError("sample_values: n must be a power of two");
  if (2 * static_cast<double>(p.max_abs_freq()[0]) >= static_cast<double>(n))
    throw DomainError("sample_values: n must exceed twice the degree");
  std::vector<fftw_complex> spec(n / 2 + 1);
  for (auto& c : spec) c[0] = c[1] = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto j = static_cast<std::size_t>(p.freq(i)[0]);
    // c cos(jx) + s sin(jx) = Re((c - i s) e^{ijx}); the c2r transform doubles j > 0
    const double w = j == 0 ? 1.0 : 0.5;
    spec[j][0] += w * p.cos_coeff(i);
    spec[j][1] -= w * p.sin_coeff(i);
  }
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.data(), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace ckam
