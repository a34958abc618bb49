#pragma once

#include "ckam/bigfloat.hpp"
#include "ckam/exec.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ckam {

using IntVec = std::vector<long>;

long dot(const IntVec& a, const IntVec& b);
long norm_squared(const IntVec& k);
double norm(const IntVec& k);
long sup_norm(const IntVec& k);

/// A d-vector of frequencies held at an explicit working precision.
///
/// The entries are produced by a generator so that the same vector can be
/// re-derived at a higher precision (golden mean, roots of two, ...) instead
/// of merely padding already-rounded digits.
class FrequencyVector {
 public:
  using Generator = std::function<BigFloat(std::size_t index, unsigned bits)>;

  /// Entries given as doubles; they are exact binary values at every precision.
  explicit FrequencyVector(const std::vector<double>& entries,
                           unsigned bits = kDefaultPrecisionBits);
  FrequencyVector(std::size_t dim, Generator gen, std::string label,
                  unsigned bits = kDefaultPrecisionBits);

  static FrequencyVector golden(unsigned bits = kDefaultPrecisionBits);
  /// (1, 2^{1/d}, ..., 2^{(d-1)/d}).
  static FrequencyVector spread(std::size_t d, unsigned bits = kDefaultPrecisionBits);
  /// (1, sum_{j=1..4} 10^{-j!}).
  static FrequencyVector liouville_demo(unsigned bits = kDefaultPrecisionBits);
  /// "golden", "spread-<d>", "liouville-demo", or a comma separated list of decimals.
  static FrequencyVector parse(const std::string& text, unsigned bits = kDefaultPrecisionBits);

  std::size_t dim() const { return entries_.size(); }
  unsigned precision() const { return bits_; }
  const std::string& label() const { return label_; }
  const BigFloat& operator[](std::size_t i) const { return entries_[i]; }
  std::vector<double> approx() const;
  FrequencyVector at_precision(unsigned bits) const;

  /// Linear image K w for an integer matrix given row by row.
  FrequencyVector transformed(const std::vector<IntVec>& rows) const;

 private:
  void validate() const;

  std::shared_ptr<const Generator> gen_;
  std::string label_;
  unsigned bits_;
  std::vector<BigFloat> entries_;
};

/// Partial quotients of the continued fraction of x. Stops early when the
/// remainder vanishes at the working precision (x rational).
std::vector<long> cf_expand(const BigFloat& x, std::size_t n_terms);
std::vector<long> cf_expand(double x, std::size_t n_terms);

/// <w, k> at the precision of w.
BigFloat small_denominator(const FrequencyVector& omega, const IntVec& k);

enum class HitKind { kResonant, kNearResonant, kNonHit };

struct ResonanceHit {
  IntVec k;
  BigFloat value;     // <w,k>
  double norm = 0.0;  // Euclidean |k|
  double tau_eff = 0.0;
  HitKind kind = HitKind::kNearResonant;

  double value_double() const { return value.to_double(); }
};

/// tau solving |value| = |k|^{-(d-1+tau)}; +inf for an exact zero (or |k| = 1
/// with |value| < 1), -inf when |value| >= 1.
double effective_tau(const BigFloat& value, double k_norm, std::size_t d);

/// Every k with 0 < |k|_inf <= k_max (first nonzero entry positive) and
/// |<w,k>| < C / |k|^{d-1}, sorted by |k| then lexicographically.
std::vector<ResonanceHit> find_resonances(const FrequencyVector& omega, long k_max, double c = 1.0,
                                          Exec exec = Exec::kParallel);

/// Re-checks the hit inequality at a different precision.
bool verify_hit(const FrequencyVector& omega, const ResonanceHit& hit, double c);

struct DiophantineProfile {
  double beta_est = 0.0;  // clamped below by d - 1
  double beta_raw = 0.0;  // record-regression slope before clamping
  std::vector<ResonanceHit> hits;
  long scan_bound = 0;
  bool liouville_flag = false;
  bool resonant = false;
  std::vector<std::pair<long, double>> sub_scans;  // (bound, raw beta)
};

/// Finite-scale approximability profile.
///
/// The exponent is the least-squares slope of -ln|<w,k>| against ln|k| over
/// the record hits (best approximations with |k| >= 2). The Liouville flag is
/// raised when that slope is nondecreasing across at least three dyadic
/// sub-scans and grows by more than `growth_margin` overall.
DiophantineProfile classify(const FrequencyVector& omega, long k_max, double growth_margin = 0.25);

}  // namespace ckam
