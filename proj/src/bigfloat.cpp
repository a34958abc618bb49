#include "ckam/bigfloat.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ckam {

namespace {

mpfr_prec_t joint(const BigFloat& a, const BigFloat& b) {
  return static_cast<mpfr_prec_t>(std::max(a.precision(), b.precision()));
}

}  // namespace

BigFloat::BigFloat(const std::string& decimal, unsigned bits) {
  mpfr_init2(v_, bits);
  if (mpfr_set_str(v_, decimal.c_str(), 10, MPFR_RNDN) != 0) {
    mpfr_clear(v_);
    throw std::invalid_argument("BigFloat: cannot parse '" + decimal + "'");
  }
}

std::string BigFloat::to_string(int digits) const {
  std::vector<char> buf(static_cast<std::size_t>(digits) + 32);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
  return std::string(buf.data());
}

BigFloat operator+(const BigFloat& a, const BigFloat& b) {
  BigFloat r(static_cast<unsigned>(joint(a, b)));
  mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigFloat operator-(const BigFloat& a, const BigFloat& b) {
  BigFloat r(static_cast<unsigned>(joint(a, b)));
  mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigFloat operator*(const BigFloat& a, const BigFloat& b) {
  BigFloat r(static_cast<unsigned>(joint(a, b)));
  mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigFloat operator/(const BigFloat& a, const BigFloat& b) {
  BigFloat r(static_cast<unsigned>(joint(a, b)));
  mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
  return r;
}

BigFloat operator*(const BigFloat& a, long b) {
  BigFloat r(a.precision());
  mpfr_mul_si(r.v_, a.v_, b, MPFR_RNDN);
  return r;
}

BigFloat BigFloat::operator-() const {
  BigFloat r(precision());
  mpfr_neg(r.v_, v_, MPFR_RNDN);
  return r;
}

BigFloat abs(const BigFloat& x) {
  BigFloat r(x.precision());
  mpfr_abs(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat sqrt(const BigFloat& x) {
  BigFloat r(x.precision());
  mpfr_sqrt(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat log(const BigFloat& x) {
  BigFloat r(x.precision());
  mpfr_log(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigFloat floor(const BigFloat& x) {
  BigFloat r(x.precision());
  mpfr_floor(r.get(), x.get());
  return r;
}

BigFloat round(const BigFloat& x) {
  BigFloat r(x.precision());
  mpfr_round(r.get(), x.get());
  return r;
}

BigFloat rational_power(const BigFloat& x, long num, long den) {
  BigFloat e(static_cast<long>(num), x.precision());
  BigFloat d(static_cast<long>(den), x.precision());
  BigFloat q = e / d;
  BigFloat r(x.precision());
  mpfr_pow(r.get(), x.get(), q.get(), MPFR_RNDN);
  return r;
}

BigFloat pow10(long exponent, unsigned bits) {
  BigFloat r(bits);
  mpfr_set_si(r.get(), 10, MPFR_RNDN);
  mpfr_pow_si(r.get(), r.get(), exponent, MPFR_RNDN);
  return r;
}

BigFloat with_precision(const BigFloat& x, unsigned bits) {
  BigFloat r(bits);
  mpfr_set(r.get(), x.get(), MPFR_RNDN);
  return r;
}

long to_long(const BigFloat& x) { return mpfr_get_si(x.get(), MPFR_RNDN); }

}  // namespace ckam
