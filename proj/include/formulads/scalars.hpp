#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace formulads {

using BigInt = mpz_class;
using Rational = mpq_class;  // always canonical: reduced, positive denominator

Rational parse_rational(std::string_view text);  // "3", "-1/3", "1.25", "2e-3"
std::string to_string(const Rational& q);

// value = mantissa * 2^-frac_bits
class FixedPoint {
 public:
  FixedPoint() = default;
  FixedPoint(BigInt mantissa, unsigned frac_bits)
      : m_(std::move(mantissa)), b_(frac_bits) {}
  static FixedPoint from_int(long v, unsigned frac_bits);

  const BigInt& mantissa() const { return m_; }
  unsigned frac_bits() const { return b_; }
  int sign() const { return sgn(m_); }
  bool is_zero() const { return sgn(m_) == 0; }

  Rational to_rational() const;
  double to_double() const;

  FixedPoint operator-() const { return FixedPoint(-m_, b_); }
  FixedPoint& operator+=(const FixedPoint& o);
  FixedPoint& operator-=(const FixedPoint& o);
  FixedPoint& operator*=(const FixedPoint& o);
  FixedPoint& operator/=(const FixedPoint& o);

  friend FixedPoint operator+(FixedPoint a, const FixedPoint& c) { return a += c; }
  friend FixedPoint operator-(FixedPoint a, const FixedPoint& c) { return a -= c; }
  friend FixedPoint operator*(FixedPoint a, const FixedPoint& c) { return a *= c; }
  friend FixedPoint operator/(FixedPoint a, const FixedPoint& c) { return a /= c; }
  friend bool operator==(const FixedPoint& a, const FixedPoint& c);
  friend std::strong_ordering operator<=>(const FixedPoint& a, const FixedPoint& c);

 private:
  BigInt m_;
  unsigned b_ = 0;
};

FixedPoint fx_round(const Rational& x, unsigned frac_bits);
enum class FxOp { add, sub, mul, div };
FixedPoint fx_arith(const FixedPoint& a, const FixedPoint& c, FxOp op);
FixedPoint fx_abs(const FixedPoint& a);
FixedPoint fx_sqrt(const FixedPoint& a);  // rounded to nearest; a >= 0
FixedPoint parse_fixed(std::string_view text, unsigned frac_bits);  // decimal or hex-float
std::string to_string(const FixedPoint& x);

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

bool is_prime(std::uint64_t n);  // deterministic for 64-bit inputs

// Modular multiply with a fast path for 2^61-1.
inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  unsigned __int128 x = static_cast<unsigned __int128>(a) * b;
  if (p == kMersenne61) {
    std::uint64_t r = static_cast<std::uint64_t>(x & kMersenne61) +
                      static_cast<std::uint64_t>(x >> 61);
    return r >= p ? r - p : r;
  }
  return static_cast<std::uint64_t>(x % p);
}
inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  std::uint64_t r = a + b;
  return r >= p ? r - p : r;
}
inline std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return a >= b ? a - b : a + p - b;
}
std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p);
std::uint64_t invmod(std::uint64_t a, std::uint64_t p);  // throws ZeroInverse

class FieldElem {
 public:
  FieldElem() = default;
  FieldElem(std::uint64_t residue, std::uint64_t modulus)
      : r_(residue % modulus), p_(modulus) {}
  static FieldElem from_int(std::int64_t v, std::uint64_t modulus);
  static FieldElem from_rational(const Rational& q, std::uint64_t modulus);

  std::uint64_t residue() const { return r_; }
  std::uint64_t modulus() const { return p_; }
  bool is_zero() const { return r_ == 0; }

  FieldElem inv() const;
  FieldElem pow(std::uint64_t e) const { return FieldElem(powmod(r_, e, p_), p_); }

  FieldElem operator-() const { return FieldElem(r_ == 0 ? 0 : p_ - r_, p_); }
  friend FieldElem operator+(const FieldElem& a, const FieldElem& c);
  friend FieldElem operator-(const FieldElem& a, const FieldElem& c);
  friend FieldElem operator*(const FieldElem& a, const FieldElem& c);
  friend FieldElem operator/(const FieldElem& a, const FieldElem& c) { return a * c.inv(); }
  FieldElem& operator+=(const FieldElem& o) { return *this = *this + o; }
  FieldElem& operator-=(const FieldElem& o) { return *this = *this - o; }
  FieldElem& operator*=(const FieldElem& o) { return *this = *this * o; }
  friend bool operator==(const FieldElem& a, const FieldElem& c) = default;

 private:
  std::uint64_t r_ = 0;
  std::uint64_t p_ = 0;
};

enum class FpOp { add, sub, mul, inv };
FieldElem fp_arith(const FieldElem& a, const FieldElem& c, FpOp op);
FieldElem parse_field(std::string_view text, std::uint64_t modulus);
std::string to_string(const FieldElem& x);

}  // namespace formulads
