#include "formulads/construct.hpp"

namespace formulads {

namespace {
Rational power(const Rational& base, std::size_t e) {
  Rational r(1);
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}
}  // namespace

NormBudget norm_budget(std::size_t s, const Rational& kappa) {
  NormBudget b;
  b.kappa = kappa;
  b.bound_N = power(kappa, s);
  b.bound_N_alt = Rational(2 * static_cast<long>(s)) * kappa;
  b.bound_Ninv = power(Rational(10) * kappa, 2 * s + 1);
  b.bound_rowblock = power(Rational(5) * kappa, s);
  b.bound_IJ = power(kappa, s);
  return b;
}

}  // namespace formulads
