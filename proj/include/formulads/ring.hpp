#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include "formulads/errors.hpp"
#include "formulads/matrix.hpp"
#include "formulads/scalars.hpp"

namespace formulads {

// Ring policies: the scalar type plus whatever context it needs
// (fractional bits, modulus) and the singularity tolerance.

struct RationalRing {
  using value_type = Rational;
  static constexpr bool exact = true;
  static constexpr bool has_sqrt = false;

  Rational zero() const { return Rational(0); }
  Rational one() const { return Rational(1); }
  Rational from_int(long v) const { return Rational(v); }
  Rational from_rational(const Rational& q) const { return q; }
  Rational to_rational(const Rational& v) const { return v; }
  double to_double(const Rational& v) const { return v.get_d(); }
  double magnitude(const Rational& v) const { return std::fabs(v.get_d()); }
  bool is_zero(const Rational& v) const { return sgn(v) == 0; }
  bool negligible(const Rational& v, double) const { return sgn(v) == 0; }
  std::string format(const Rational& v) const { return v.get_str(); }
  std::string name() const { return "rational"; }
};

struct Float64Ring {
  using value_type = double;
  static constexpr bool exact = false;
  static constexpr bool has_sqrt = true;
  double rel_tol = 1e-12;

  double zero() const { return 0.0; }
  double one() const { return 1.0; }
  double from_int(long v) const { return static_cast<double>(v); }
  double from_rational(const Rational& q) const { return q.get_d(); }
  Rational to_rational(double v) const { return Rational(v); }
  double to_double(double v) const { return v; }
  double magnitude(double v) const { return std::fabs(v); }
  bool is_zero(double v) const { return v == 0.0; }
  // scale is the norm of the row the value came from
  bool negligible(double v, double scale) const {
    return std::fabs(v) < rel_tol * (scale > 0 ? scale : 1.0);
  }
  double sqrt(double v) const { return std::sqrt(v); }
  std::string format(double v) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  std::string name() const { return "float64"; }
};

struct FixedRing {
  using value_type = FixedPoint;
  static constexpr bool exact = false;
  static constexpr bool has_sqrt = true;
  unsigned frac_bits = 96;

  FixedPoint zero() const { return FixedPoint(BigInt(0), frac_bits); }
  FixedPoint one() const { return FixedPoint::from_int(1, frac_bits); }
  FixedPoint from_int(long v) const { return FixedPoint::from_int(v, frac_bits); }
  FixedPoint from_rational(const Rational& q) const { return fx_round(q, frac_bits); }
  Rational to_rational(const FixedPoint& v) const { return v.to_rational(); }
  double to_double(const FixedPoint& v) const { return v.to_double(); }
  double magnitude(const FixedPoint& v) const { return std::fabs(v.to_double()); }
  bool is_zero(const FixedPoint& v) const { return v.is_zero(); }
  // |v| < 2^(-b/2), independent of scale
  bool negligible(const FixedPoint& v, double) const {
    if (v.is_zero()) return true;
    std::size_t bits = mpz_sizeinbase(v.mantissa().get_mpz_t(), 2);
    // |m| < 2^bits; |v| < 2^(bits - b)
    return 2 * static_cast<long>(bits) <= static_cast<long>(frac_bits);
  }
  FixedPoint sqrt(const FixedPoint& v) const { return fx_sqrt(v); }
  std::string format(const FixedPoint& v) const { return to_string(v); }
  std::string name() const { return "fixed(" + std::to_string(frac_bits) + ")"; }
};

struct PrimeFieldRing {
  using value_type = FieldElem;
  static constexpr bool exact = true;
  static constexpr bool has_sqrt = false;
  std::uint64_t modulus = kMersenne61;

  FieldElem zero() const { return FieldElem(0, modulus); }
  FieldElem one() const { return FieldElem(1, modulus); }
  FieldElem from_int(long v) const { return FieldElem::from_int(v, modulus); }
  FieldElem from_rational(const Rational& q) const { return FieldElem::from_rational(q, modulus); }
  double to_double(const FieldElem& v) const { return static_cast<double>(v.residue()); }
  double magnitude(const FieldElem& v) const { return v.is_zero() ? 0.0 : 1.0; }
  bool is_zero(const FieldElem& v) const { return v.is_zero(); }
  bool negligible(const FieldElem& v, double) const { return v.is_zero(); }
  std::string format(const FieldElem& v) const { return to_string(v); }
  std::string name() const { return "field(" + std::to_string(modulus) + ")"; }
};

template <class Ring>
Matrix<typename Ring::value_type> zeros(const Ring& ring, std::size_t r, std::size_t c) {
  return Matrix<typename Ring::value_type>(r, c, ring.zero());
}

template <class Ring>
Matrix<typename Ring::value_type> identity(const Ring& ring, std::size_t n) {
  auto m = zeros(ring, n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = ring.one();
  return m;
}

template <class Ring>
Matrix<typename Ring::value_type> convert(const Ring& ring, const Matrix<Rational>& a) {
  return map_matrix(a, [&](const Rational& q) { return ring.from_rational(q); }, ring.zero());
}

template <class Ring>
Matrix<Rational> to_rational(const Ring& ring, const Matrix<typename Ring::value_type>& a) {
  return map_matrix(a, [&](const auto& v) { return ring.to_rational(v); }, Rational(0));
}

template <class Ring>
Matrix<typename Ring::value_type> multiply(const Ring& ring,
                                           const Matrix<typename Ring::value_type>& a,
                                           const Matrix<typename Ring::value_type>& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: shape mismatch");
  auto out = zeros(ring, a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const auto& aik = a(i, k);
      if (ring.is_zero(aik)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// Frobenius norm, evaluated in double.
template <class Ring>
double frobenius(const Ring& ring, const Matrix<typename Ring::value_type>& a) {
  double s = 0;
  for (const auto& v : a.data()) {
    double d = ring.to_double(v);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace formulads
