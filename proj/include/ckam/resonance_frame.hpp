#pragma once

#include "ckam/diophantine.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <vector>

namespace ckam {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;
using RatMatrix = std::vector<std::vector<Rational>>;

/// Integer matrix K with pairwise orthogonal rows (k, k', fill rows...).
struct ResonanceFrame {
  IntVec k;
  IntVec k_prime;
  std::vector<IntVec> fill_rows;
  BigInt det;

  std::size_t dim() const { return k.size(); }
  std::vector<IntVec> rows() const;
};

/// Phi = blockdiag(K, K^{-T}); `verified` is set only after the exact check.
struct SymplecticLift {
  RatMatrix K;
  RatMatrix K_inv_T;
  bool verified = false;

  /// The 2d x 2d block matrix.
  RatMatrix phi() const;
};

struct RegimeThresholds {
  double bound1_max = 10.0;
  double ratio2_min = 0.1;
  double ratio2_max = 10.0;
};

struct PushforwardReport {
  FrequencyVector omega_new;
  double bound1 = 0.0;  // |w'_1| |k|^{d+tau-1}
  double ratio2 = 0.0;  // |w'_2| / |k|
  bool in_regime = false;
};

enum class FillMethod { kAuto, kKernel, kCross };

/// Partner k' orthogonal to k. d = 2: the sign-normalized rotation of k.
/// d >= 3: maximizes |<k',w>|/|k'| over |k'|_inf <= ceil(r|k|), |k'| <= r|k|,
/// lexicographic tie-break; throws PartnerQualityError if the best value of
/// |<k',w>| is below |k|/8.
IntVec orthogonal_partner(const IntVec& k, const FrequencyVector& omega, double search_radius = 2.0,
                          Exec exec = Exec::kParallel);

/// Fills rows 3..d with primitive integer vectors spanning the orthogonal
/// complement of {k, k'}. kAuto uses the cross product for d = 3.
ResonanceFrame complete_frame(const IntVec& k, const IntVec& k_prime,
                              FillMethod method = FillMethod::kAuto);

/// Integer basis of {x in Z^d : A x = 0} by unimodular column reduction.
std::vector<IntVec> integer_kernel(const std::vector<IntVec>& a);

RatMatrix to_rational(const std::vector<IntVec>& m);
/// Exact inverse by Gauss-Jordan; DomainError when singular.
RatMatrix inverse(const RatMatrix& m);
RatMatrix transpose(const RatMatrix& m);
RatMatrix multiply(const RatMatrix& a, const RatMatrix& b);
Rational determinant(const RatMatrix& m);

/// Exact check of Phi^T J Phi = J.
bool is_symplectic(const RatMatrix& phi);

SymplecticLift symplectic_lift(const RatMatrix& K);
SymplecticLift symplectic_lift(const ResonanceFrame& frame);

PushforwardReport pushforward(const ResonanceFrame& frame, const FrequencyVector& omega, double tau,
                              const RegimeThresholds& thresholds = {});

/// Structured text (JSON) record: dimension, rows, det, K^{-T} as [num, den] pairs.
std::string frame_record(const ResonanceFrame& frame, const SymplecticLift& lift);
ResonanceFrame frame_from_record(const std::string& text);

}  // namespace ckam
