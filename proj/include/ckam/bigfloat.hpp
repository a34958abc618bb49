#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

namespace ckam {

/// Working precision used for frequency vectors unless a caller asks otherwise.
inline constexpr unsigned kDefaultPrecisionBits = 256;

/// Owning wrapper around an mpfr_t with an explicit precision in bits.
///
/// Arithmetic results take the larger precision of the two operands, so a
/// value never silently loses bits when mixed with a more precise one.
class BigFloat {
 public:
  explicit BigFloat(unsigned bits = kDefaultPrecisionBits) {
    mpfr_init2(v_, bits);
    mpfr_set_zero(v_, 1);
  }
  BigFloat(double x, unsigned bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  BigFloat(long x, unsigned bits) {
    mpfr_init2(v_, bits);
    mpfr_set_si(v_, x, MPFR_RNDN);
  }
  /// Parses a decimal string (e.g. "0.3") correctly rounded at `bits`.
  BigFloat(const std::string& decimal, unsigned bits);

  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  unsigned precision() const { return static_cast<unsigned>(mpfr_get_prec(v_)); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  /// Decimal rendering with `digits` significant digits.
  std::string to_string(int digits = 40) const;

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b);
  friend BigFloat operator*(const BigFloat& a, long b);
  BigFloat operator-() const;
  BigFloat& operator+=(const BigFloat& b) { return *this = *this + b; }

  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return b < a; }
  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

 private:
  mpfr_t v_;
};

BigFloat abs(const BigFloat& x);
BigFloat sqrt(const BigFloat& x);
BigFloat log(const BigFloat& x);
BigFloat floor(const BigFloat& x);
BigFloat round(const BigFloat& x);
/// x^(num/den) for positive x.
BigFloat rational_power(const BigFloat& x, long num, long den);
BigFloat pow10(long exponent, unsigned bits);
/// x rounded to a different precision.
BigFloat with_precision(const BigFloat& x, unsigned bits);
long to_long(const BigFloat& x);

}  // namespace ckam
