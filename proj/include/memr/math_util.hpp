#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace memr {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

// Seeded random stream. Wraps the engine together with the normal-deviate
// cache so the complete state round-trips through checkpoints.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() { return normal_(engine_); }
  double normal(double mean, double std) { return mean + std * normal(); }

  // Uniform integer in [0, n). n must be >= 1.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::uniform_index: n must be >= 1");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  void save(std::ostream& os) const {
    os << engine_ << '\n' << normal_ << '\n';
  }
  void load(std::istream& is) {
    is >> engine_;
    is >> normal_;
    if (!is) throw std::runtime_error("Rng::load: malformed stream state");
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double digamma(double x);

// ln of the volume of the d-dimensional Euclidean unit ball.
double log_unit_ball_volume(int dim);

// Smooth clamp of a raw network output into [lo, hi]. The softplus pair can
// overshoot hi by at most ln(1+e^(lo-hi)); that residue is cut hard and the
// derivative there is exactly zero.
struct SoftBound {
  double lo;
  double hi;

  double value(double x) const {
    const double t = hi - softplus(hi - x);
    const double y = lo + softplus(t - lo);
    return y > hi ? hi : y;
  }
  double deriv(double x) const {
    const double t = hi - softplus(hi - x);
    const double y = lo + softplus(t - lo);
    if (y > hi) return 0.0;
    return sigmoid(hi - x) * sigmoid(t - lo);
  }
};

}  // namespace memr
