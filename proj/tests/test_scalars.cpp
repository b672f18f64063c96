#include <doctest.h>

#include <random>

#include "formulads/errors.hpp"
#include "formulads/scalars.hpp"

using namespace formulads;

TEST_CASE("fx_round rounds to nearest with ties to even") {
  CHECK(fx_round(Rational(0), 8).is_zero());
  CHECK(fx_round(Rational(0), 64).is_zero());
  CHECK(fx_round(Rational(1, 3), 8).mantissa() == 85);
  CHECK(fx_round(Rational(1, 512), 8).mantissa() == 0);
  CHECK(fx_round(Rational(3, 512), 8).mantissa() == 2);
  CHECK(fx_round(Rational(-1, 512), 8).mantissa() == 0);
  CHECK(fx_round(Rational(-3, 512), 8).mantissa() == -2);
}

TEST_CASE("rounding error is at most half an ulp") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> num(-100000, 100000), den(1, 9999);
  for (int trial = 0; trial < 500; ++trial) {
    Rational x(num(rng), den(rng));
    x.canonicalize();
    unsigned b = 1 + static_cast<unsigned>(trial % 40);
    Rational err = abs(fx_round(x, b).to_rational() - x);
    Rational half_ulp(1);
    half_ulp /= Rational(BigInt(1) << (b + 1));
    CHECK(err <= half_ulp);
  }
}

TEST_CASE("fx_arith examples") {
  auto one = FixedPoint::from_int(1, 8), three = FixedPoint::from_int(3, 8);
  CHECK(fx_arith(one, one, FxOp::add) == FixedPoint::from_int(2, 8));
  auto tiny = fx_round(Rational(1, 256), 8);
  CHECK(fx_arith(tiny, tiny, FxOp::mul).is_zero());
  auto third = fx_arith(one, three, FxOp::div);
  Rational err = abs(third.to_rational() - Rational(1, 3));
  CHECK(err <= Rational(1, 256));
  auto ref = fx_round(Rational(1, 3), 8);
  CHECK(abs(third.mantissa() - ref.mantissa()) <= 1);
  CHECK_THROWS_AS(fx_arith(one, FixedPoint::from_int(0, 8), FxOp::div), DivisionByZero);
}

TEST_CASE("mixed precision operands are rejected") {
  CHECK_THROWS(FixedPoint::from_int(1, 8) + FixedPoint::from_int(1, 9));
}

TEST_CASE("fixed-point multiply and divide match exact rounding") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> m(-5000, 5000);
  for (int trial = 0; trial < 300; ++trial) {
    unsigned b = 4 + static_cast<unsigned>(trial % 30);
    auto a = fx_round(Rational(m(rng), 37), b), c = fx_round(Rational(m(rng) | 1, 41), b);
    CHECK(fx_arith(a, c, FxOp::mul) == fx_round(a.to_rational() * c.to_rational(), b));
    CHECK(fx_arith(a, c, FxOp::div) == fx_round(a.to_rational() / c.to_rational(), b));
    CHECK(fx_arith(a, c, FxOp::add).to_rational() == a.to_rational() + c.to_rational());
  }
}

TEST_CASE("fx_sqrt") {
  CHECK(fx_sqrt(FixedPoint::from_int(4, 16)) == FixedPoint::from_int(2, 16));
  auto r2 = fx_sqrt(FixedPoint::from_int(2, 30));
  CHECK(std::abs(r2.to_double() - 1.4142135623730951) < 1e-9);
}

TEST_CASE("parsing rationals and fixed-point literals") {
  CHECK(parse_rational("-1/3") == Rational(-1, 3));
  CHECK(parse_rational("1.25") == Rational(5, 4));
  CHECK(parse_rational("2e-3") == Rational(1, 500));
  CHECK(parse_fixed("0x1.8p1", 8) == FixedPoint::from_int(3, 8));
  CHECK(parse_fixed("0.5", 4).mantissa() == 8);
  CHECK_THROWS(parse_rational("1//2"));
}

TEST_CASE("prime field arithmetic") {
  auto a = FieldElem::from_int(3, 7), c = FieldElem::from_int(5, 7);
  CHECK(fp_arith(a, c, FpOp::add).residue() == 1);
  CHECK(fp_arith(a, a, FpOp::inv).residue() == 5);
  CHECK_THROWS_AS(fp_arith(FieldElem::from_int(0, 7), a, FpOp::inv), ZeroInverse);
  CHECK(FieldElem::from_int(-1, 7).residue() == 6);
  CHECK(FieldElem::from_rational(Rational(1, 2), 7).residue() == 4);
  CHECK(parse_field("12", 13).residue() == 12);
  CHECK_THROWS(parse_field("13", 13));
}

TEST_CASE("Mersenne modular multiply agrees with the generic path") {
  std::mt19937_64 rng(3);
  const std::uint64_t p = kMersenne61;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uint64_t a = rng() % p, b = rng() % p;
    auto expect = static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
    CHECK(mulmod(a, b, p) == expect);
    if (a != 0) CHECK(mulmod(a, invmod(a, p), p) == 1);
  }
}

TEST_CASE("primality") {
  CHECK(is_prime(kMersenne61));
  CHECK(is_prime(7));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(561));
  CHECK_FALSE(is_prime((std::uint64_t{1} << 61) + 1));
}
