#include "formulads/dyninv.hpp"

#include <algorithm>
#include <cmath>

namespace formulads {

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::Explicit: return "explicit";
    case EngineKind::Lazy: return "lazy";
    case EngineKind::TwoLevel: return "twolevel";
  }
  return "unknown";
}

EngineKind parse_engine_kind(const std::string& text) {
  if (text == "explicit") return EngineKind::Explicit;
  if (text == "lazy") return EngineKind::Lazy;
  if (text == "twolevel") return EngineKind::TwoLevel;
  throw std::invalid_argument("unknown engine '" + text + "'");
}

unsigned certified_frac_bits(double kappa, std::size_t t_max, double eps) {
  if (!(kappa >= 1) || !(eps > 0)) throw std::invalid_argument("certified bits need kappa >= 1, eps > 0");
  double t = static_cast<double>(std::max<std::size_t>(t_max, 1));
  double b = 27.0 * std::log2(kappa) + std::log2(t / eps) + 16.0;
  return static_cast<unsigned>(std::ceil(std::max(b, 1.0)));
}

}  // namespace formulads
