#include "memr/math_util.hpp"

#include <cmath>
#include <stdexcept>

namespace memr {

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

double log_unit_ball_volume(int dim) {
  if (dim < 1) throw std::invalid_argument("log_unit_ball_volume: dim must be >= 1");
  const double d = static_cast<double>(dim);
  return 0.5 * d * std::log(kPi) - std::lgamma(0.5 * d + 1.0);
}

}  // namespace memr
