#include "formulads/scalars.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "formulads/errors.hpp"

namespace formulads {
namespace {

// floor-based quotient of num/den rounded half to even; den > 0.
BigInt div_round_even(const BigInt& num, const BigInt& den) {
  BigInt q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  BigInt twice = r * 2;
  int c = cmp(twice, den);
  if (c > 0 || (c == 0 && mpz_odd_p(q.get_mpz_t()))) ++q;
  return q;
}

// round(x / 2^shift) half to even. The low bits of x in two's complement are
// exactly the floor remainder, so the tie test reads bits directly.
BigInt shift_round_even(const BigInt& x, unsigned shift) {
  if (shift == 0) return x;
  BigInt q;
  mpz_fdiv_q_2exp(q.get_mpz_t(), x.get_mpz_t(), shift);
  if (mpz_tstbit(x.get_mpz_t(), shift - 1)) {
    bool above_half = shift > 1 && mpz_scan1(x.get_mpz_t(), 0) < shift - 1;
    if (above_half || mpz_odd_p(q.get_mpz_t())) ++q;
  }
  return q;
}

void require_same_bits(const FixedPoint& a, const FixedPoint& c) {
  if (a.frac_bits() != c.frac_bits())
    throw std::logic_error("fixed-point operands with different frac_bits");
}

int digit_value(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}

BigInt pow2(unsigned e) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

Rational parse_hex_float(std::string_view s, bool negative) {
  // s starts after "0x"
  BigInt mant = 0;
  long exp2 = 0;
  std::size_t i = 0;
  bool any = false;
  bool dot = false;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (ch == '.' && !dot) {
      dot = true;
      continue;
    }
    int d = digit_value(ch);
    if (d < 0) break;
    mant = mant * 16 + d;
    if (dot) exp2 -= 4;
    any = true;
  }
  if (!any) throw std::invalid_argument("bad hex literal");
  if (i < s.size()) {
    if (s[i] != 'p' && s[i] != 'P') throw std::invalid_argument("bad hex literal");
    std::string e(s.substr(i + 1));
    std::size_t used = 0;
    long v = std::stol(e, &used);
    if (used != e.size()) throw std::invalid_argument("bad hex exponent");
    exp2 += v;
  }
  Rational q(mant);
  if (exp2 >= 0)
    q *= Rational(pow2(static_cast<unsigned>(exp2)));
  else
    q /= Rational(pow2(static_cast<unsigned>(-exp2)));
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t end = text.size();
  while (end > i && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  std::string_view s = text.substr(i, end - i);
  if (s.empty()) throw std::invalid_argument("empty number");
  bool negative = false;
  std::size_t k = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    k = 1;
  }
  if (s.size() > k + 1 && s[k] == '0' && (s[k + 1] == 'x' || s[k + 1] == 'X'))
    return parse_hex_float(s.substr(k + 2), negative);
  std::size_t slash = s.find('/');
  if (slash != std::string_view::npos) {
    std::string num(s.substr(k, slash - k));
    std::string den(s.substr(slash + 1));
    auto digits = [](const std::string& d) {
      if (d.empty()) return false;
      for (char ch : d)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
      return true;
    };
    if (!digits(num) || !digits(den)) throw std::invalid_argument("bad rational");
    BigInt n(num), d(den);
    if (d == 0) throw std::invalid_argument("zero denominator");
    Rational q(n, d);
    q.canonicalize();
    return negative ? Rational(-q) : q;
  }
  BigInt mant = 0;
  long exp10 = 0;
  bool dot = false, any = false;
  std::size_t j = k;
  for (; j < s.size(); ++j) {
    char ch = s[j];
    if (ch == '.' && !dot) {
      dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(ch))) break;
    mant = mant * 10 + (ch - '0');
    if (dot) --exp10;
    any = true;
  }
  if (!any) throw std::invalid_argument("bad number");
  if (j < s.size()) {
    if (s[j] != 'e' && s[j] != 'E') throw std::invalid_argument("bad number");
    std::string e(s.substr(j + 1));
    std::size_t used = 0;
    long v = std::stol(e, &used);
    if (used != e.size()) throw std::invalid_argument("bad exponent");
    exp10 += v;
  }
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
  Rational q = exp10 >= 0 ? Rational(mant * scale) : Rational(mant, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

// ---- FixedPoint ------------------------------------------------------------

FixedPoint FixedPoint::from_int(long v, unsigned frac_bits) {
  BigInt m = v;
  m <<= frac_bits;
  return FixedPoint(std::move(m), frac_bits);
}

Rational FixedPoint::to_rational() const {
  Rational q(m_, pow2(b_));
  q.canonicalize();
  return q;
}

double FixedPoint::to_double() const {
  long exp = 0;
  double d = mpz_get_d_2exp(&exp, m_.get_mpz_t());
  return std::ldexp(d, static_cast<int>(exp - static_cast<long>(b_)));
}

FixedPoint& FixedPoint::operator+=(const FixedPoint& o) {
  require_same_bits(*this, o);
  m_ += o.m_;
  return *this;
}

FixedPoint& FixedPoint::operator-=(const FixedPoint& o) {
  require_same_bits(*this, o);
  m_ -= o.m_;
  return *this;
}

FixedPoint& FixedPoint::operator*=(const FixedPoint& o) {
  require_same_bits(*this, o);
  BigInt prod = m_ * o.m_;
  m_ = shift_round_even(prod, b_);
  return *this;
}

FixedPoint& FixedPoint::operator/=(const FixedPoint& o) {
  require_same_bits(*this, o);
  if (o.is_zero()) throw DivisionByZero();
  BigInt num = m_ << b_;
  BigInt den = o.m_;
  if (sgn(den) < 0) {
    num = -num;
    den = -den;
  }
  m_ = div_round_even(num, den);
  return *this;
}

bool operator==(const FixedPoint& a, const FixedPoint& c) {
  require_same_bits(a, c);
  return a.m_ == c.m_;
}

std::strong_ordering operator<=>(const FixedPoint& a, const FixedPoint& c) {
  require_same_bits(a, c);
  int r = cmp(a.m_, c.m_);
  return r < 0 ? std::strong_ordering::less
               : (r > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

FixedPoint fx_round(const Rational& x, unsigned frac_bits) {
  BigInt num = x.get_num() << frac_bits;
  return FixedPoint(div_round_even(num, x.get_den()), frac_bits);
}

FixedPoint fx_arith(const FixedPoint& a, const FixedPoint& c, FxOp op) {
  switch (op) {
    case FxOp::add: return a + c;
    case FxOp::sub: return a - c;
    case FxOp::mul: return a * c;
    case FxOp::div: return a / c;
  }
  throw std::logic_error("unknown op");
}

FixedPoint fx_abs(const FixedPoint& a) { return a.sign() < 0 ? -a : a; }

FixedPoint fx_sqrt(const FixedPoint& a) {
  if (a.sign() < 0) throw std::domain_error("sqrt of negative fixed-point value");
  // sqrt(m 2^-b) = sqrt(m 2^b) 2^-b
  BigInt x = a.mantissa() << a.frac_bits();
  BigInt s;
  mpz_sqrt(s.get_mpz_t(), x.get_mpz_t());
  // round to nearest: compare 4x with (2s+1)^2
  BigInt t = 2 * s + 1;
  if (cmp(BigInt(4 * x), BigInt(t * t)) > 0) ++s;
  return FixedPoint(s, a.frac_bits());
}

FixedPoint parse_fixed(std::string_view text, unsigned frac_bits) {
  return fx_round(parse_rational(text), frac_bits);
}

std::string to_string(const FixedPoint& x) { return x.to_rational().get_str(); }

// ---- prime field -------------------------------------------------------------

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  a %= p;
  while (e) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t p) {
  if (a % p == 0) throw ZeroInverse();
  return powmod(a, p - 2, p);
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % q == 0) return n == q;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

FieldElem FieldElem::from_int(std::int64_t v, std::uint64_t modulus) {
  if (v >= 0) return FieldElem(static_cast<std::uint64_t>(v), modulus);
  std::uint64_t mag = static_cast<std::uint64_t>(-(v + 1)) + 1;
  return -FieldElem(mag, modulus);
}

FieldElem FieldElem::from_rational(const Rational& q, std::uint64_t modulus) {
  FieldElem n(mpz_fdiv_ui(q.get_num_mpz_t(), modulus), modulus);
  FieldElem d(mpz_fdiv_ui(q.get_den_mpz_t(), modulus), modulus);
  return n * d.inv();
}

FieldElem FieldElem::inv() const { return FieldElem(invmod(r_, p_), p_); }

namespace {
void require_same_modulus(const FieldElem& a, const FieldElem& c) {
  if (a.modulus() != c.modulus())
    throw std::logic_error("field elements with different moduli");
}
}  // namespace

FieldElem operator+(const FieldElem& a, const FieldElem& c) {
  require_same_modulus(a, c);
  FieldElem r;
  r.p_ = a.p_;
  r.r_ = addmod(a.r_, c.r_, a.p_);
  return r;
}

FieldElem operator-(const FieldElem& a, const FieldElem& c) {
  require_same_modulus(a, c);
  FieldElem r;
  r.p_ = a.p_;
  r.r_ = submod(a.r_, c.r_, a.p_);
  return r;
}

FieldElem operator*(const FieldElem& a, const FieldElem& c) {
  require_same_modulus(a, c);
  FieldElem r;
  r.p_ = a.p_;
  r.r_ = mulmod(a.r_, c.r_, a.p_);
  return r;
}

FieldElem fp_arith(const FieldElem& a, const FieldElem& c, FpOp op) {
  switch (op) {
    case FpOp::add: return a + c;
    case FpOp::sub: return a - c;
    case FpOp::mul: return a * c;
    case FpOp::inv: return a.inv();
  }
  throw std::logic_error("unknown op");
}

FieldElem parse_field(std::string_view text, std::uint64_t modulus) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty residue");
  for (char ch : s)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::invalid_argument("residue must be a non-negative decimal");
  BigInt v(s);
  if (cmp(v, BigInt(std::to_string(modulus))) >= 0)
    throw std::invalid_argument("residue out of range");
  return FieldElem(std::stoull(s), modulus);
}

std::string to_string(const FieldElem& x) { return std::to_string(x.residue()); }

}  // namespace formulads
