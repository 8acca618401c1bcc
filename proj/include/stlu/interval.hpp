#pragma once

#include <algorithm>
#include <initializer_list>
#include <limits>

#include "stlu/errors.hpp"

namespace stlu {

// Robustness degree interval [lower, upper]: the worst-case and best-case
// degrees to which any trace inside a flowpipe satisfies (positive) or
// violates (negative) a formula.
struct RobustInterval {
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const RobustInterval&, const RobustInterval&) = default;
};

// Identity element of max_star folds. Never returned by the monitor itself:
// every temporal window is non-empty, so at least one real interval replaces
// both bounds.
inline constexpr RobustInterval bottom_interval{
    std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

inline RobustInterval neg_star(RobustInterval v) {
  return {-v.upper, -v.lower};
}

inline RobustInterval min_star(RobustInterval a, RobustInterval b) {
  return {std::min(a.lower, b.lower), std::min(a.upper, b.upper)};
}

inline RobustInterval max_star(RobustInterval a, RobustInterval b) {
  return {std::max(a.lower, b.lower), std::max(a.upper, b.upper)};
}

inline RobustInterval min_star(std::initializer_list<RobustInterval> vs) {
  if (vs.size() == 0) throw contract_error("min_star: empty argument list");
  RobustInterval acc = *vs.begin();
  for (const auto& v : vs) acc = min_star(acc, v);
  return acc;
}

inline RobustInterval max_star(std::initializer_list<RobustInterval> vs) {
  if (vs.size() == 0) throw contract_error("max_star: empty argument list");
  RobustInterval acc = *vs.begin();
  for (const auto& v : vs) acc = max_star(acc, v);
  return acc;
}

}  // namespace stlu
