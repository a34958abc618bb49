#pragma once

#include "ckam/diophantine.hpp"
#include "ckam/exec.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ckam {

/// 2pi-periodic function of one variable with derivatives up to a declared order.
class PeriodicFn {
 public:
  /// Writes f, f', ..., f^{(order)} at x in [-pi, pi) into out[0..order].
  using Jet = std::function<void(double x, int order, double* out)>;
  static constexpr int kInfinite = -1;

  PeriodicFn(Jet jet, int smoothness_order, std::optional<std::pair<double, double>> support,
             std::string name);

  static PeriodicFn constant(double c);
  /// a cos(m x) + b sin(m x)
  static PeriodicFn harmonic(double a, double b, int m);

  double operator()(double x) const { return derivative(x, 0); }
  double derivative(double x, int order) const;
  /// All derivatives up to `order` at x.
  std::vector<double> jet(double x, int order) const;

  /// kInfinite for C^infinity.
  int smoothness_order() const { return smoothness_; }
  bool has_order(int k) const { return smoothness_ == kInfinite || k <= smoothness_; }
  const std::optional<std::pair<double, double>>& support() const { return support_; }
  const std::string& name() const { return name_; }

  /// a f + b g
  static PeriodicFn combine(double a, const PeriodicFn& f, double b, const PeriodicFn& g);

 private:
  Jet jet_;
  int smoothness_;
  std::optional<std::pair<double, double>> support_;
  std::string name_;
};

/// sqrt2 * exp(1 - 1/(1 - (x/R)^2)) on |x| < R, zero elsewhere; 0 < R <= pi.
PeriodicFn bump(double R);

/// Real trigonometric polynomial sum_m c_m cos<m,x> + s_m sin<m,x>.
///
/// Frequencies are kept canonical (first nonzero entry positive) and unique,
/// sorted lexicographically; -m is folded into m.
class TrigPoly {
 public:
  struct Term {
    IntVec freq;
    double cos = 0.0;
    double sin = 0.0;
  };

  explicit TrigPoly(std::size_t dim = 1);
  /// Duplicate or opposite frequencies are summed.
  static TrigPoly from_terms(std::size_t dim, const std::vector<Term>& terms);
  static TrigPoly constant(std::size_t dim, double c);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return cos_.size(); }
  bool empty() const { return cos_.empty(); }
  const long* freq(std::size_t i) const { return &freqs_[i * dim_]; }
  double cos_coeff(std::size_t i) const { return cos_[i]; }
  double sin_coeff(std::size_t i) const { return sin_[i]; }
  Term term(std::size_t i) const;
  std::vector<Term> terms() const;

  /// Max Euclidean norm of the frequencies present.
  double degree() const;
  /// Max |m_i| over terms, per coordinate.
  IntVec max_abs_freq() const;

  double operator()(const double* x) const;
  double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }
  double operator()(double x) const;  // dim 1 convenience

  /// Exact term-by-term partial derivative with multi-index alpha.
  TrigPoly derivative(const std::vector<int>& alpha) const;
  /// d^s/dx^s for dim 1.
  TrigPoly derivative(int s) const;

  TrigPoly operator+(const TrigPoly& o) const;
  TrigPoly operator-(const TrigPoly& o) const;
  TrigPoly operator*(double c) const;
  /// Product expanded by product-to-sum.
  TrigPoly operator*(const TrigPoly& o) const;

  /// p(x + shift) in coordinate i.
  TrigPoly shifted(std::size_t i, double shift) const;
  /// a(q1) * b(q2) for one-variable a, b.
  static TrigPoly tensor(const TrigPoly& a, const TrigPoly& b);
  /// Composition with q_i = <rows_i, x>: result in rows[0].size() variables.
  TrigPoly substitute(const std::vector<IntVec>& rows) const;

  /// Structured text at 17 significant digits.
  std::string to_json() const;
  static TrigPoly from_json(const std::string& text);

  friend bool operator==(const TrigPoly& a, const TrigPoly& b) {
    return a.dim_ == b.dim_ && a.freqs_ == b.freqs_ && a.cos_ == b.cos_ && a.sin_ == b.sin_;
  }

 private:
  std::size_t dim_;
  std::vector<long> freqs_;  // size() * dim_, row major
  std::vector<double> cos_, sin_;
};

struct JacksonResult {
  TrigPoly poly;
  double error_bound = 0.0;
  double kernel_constant = 0.0;  // C'_kappa, error_bound = C' M^-kappa ||f||_{C^kappa}
  double f_norm = 0.0;           // grid estimate of ||f||_{C^kappa}
  int p = 0;                     // kernel power
  std::size_t samples = 0;
};

/// Convolution of f with the normalized kernel K = (sin(Mt/2)/sin(t/2))^{2p},
/// p = ceil((kappa+2)/2), truncated to frequencies <= M.
JacksonResult jackson(const PeriodicFn& f, int M, int kappa);
/// Same operator on f given by n uniform samples on [0, 2pi); n a power of two.
TrigPoly jackson_from_samples(const std::vector<double>& samples, int M, int kappa);
/// Fourier multiplier of the operator at j = 0..M.
std::vector<double> jackson_multiplier(int M, int kappa);
/// int_{-pi}^{pi} K(t)|t|^order dt / 2pi for the normalized kernel.
double jackson_moment(int M, int kappa, int order);
/// 2 sum_{j > M} lambda_j j^-kappa: worst case of the truncated frequencies.
double jackson_tail(int M, int kappa);

/// Values of a one-variable polynomial at 2pi i / n, i = 0..n-1, by inverse FFT.
/// n must be a power of two exceeding twice the degree.
std::vector<double> sample_values(const TrigPoly& p, std::size_t n);

enum class NormMethod { kAnalytic, kGrid };

struct NormReport {
  double r = 0.0;
  double value = 0.0;
  std::size_t grid_size = 0;
  NormMethod method = NormMethod::kGrid;
  double sup_norm = 0.0;
  /// |value - value at half the grid| / value; negative when not computed.
  double refinement_delta = -1.0;
};

/// Hoelder C^r norm: sum over |alpha| <= [r] of grid sup |D^alpha f|, plus for
/// non-integer r the (r-[r]) seminorms of the order-[r] derivatives over all
/// grid pairs with torus separation in [2pi/grid, pi].
NormReport holder_norm(const PeriodicFn& f, double r, std::size_t grid = 4096);
NormReport holder_norm(const TrigPoly& p, double r, std::size_t grid = 4096,
                       Exec exec = Exec::kParallel);

/// Grid sup of |p| over grid^dim points.
double sup_grid(const TrigPoly& p, std::size_t grid, Exec exec = Exec::kParallel);

struct BernsteinReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

/// lhs = max_i grid sup |d_i^s T|, rhs = deg^s grid sup |T|. grid = 0 picks
/// max(64, 16 * max coordinate frequency) per dimension.
BernsteinReport bernstein_verify(const TrigPoly& t, int s, std::size_t grid = 0,
                                 Exec exec = Exec::kParallel);

}  // namespace ckam
