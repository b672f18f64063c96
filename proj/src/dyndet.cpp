#include "formulads/dyndet.hpp"

#include <algorithm>

namespace formulads {

FixedRing certified_fixed_ring(const Formula& f, const std::vector<Matrix<Rational>>& inputs,
                               std::size_t t_max, double eps) {
  Float64Ring fr;
  std::vector<Matrix<double>> converted;
  for (const auto& m : inputs) converted.push_back(convert(fr, m));
  auto c = build(fr, f, converted);
  auto h = build_hat(fr, c);
  double kappa = 2.0;
  for (const auto* m : {&c.N, &h.Nhat}) {
    kappa = std::max(kappa, frobenius(fr, *m));
    kappa = std::max(kappa, frobenius(fr, approx_inverse(fr, *m)));
  }
  return FixedRing{certified_frac_bits(kappa, t_max, eps)};
}

}  // namespace formulads
