#include "memr/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memr {

namespace {

constexpr double kDt = 0.05;

double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::runtime_error(std::string("non-finite state: ") + what);
  }
}

}  // namespace

PendulumEnv::PendulumEnv() {
  spec_.name = "pendulum";
  spec_.state_dim = 3;
  spec_.action_dim = 1;
  spec_.action_limit = {2.0};
  spec_.horizon = 200;
}

double PendulumEnv::wrap_angle(double theta) {
  double w = std::fmod(theta + kPi, 2.0 * kPi);
  if (w <= 0.0) w += 2.0 * kPi;
  return w - kPi;
}

std::pair<std::vector<double>, double> PendulumEnv::dynamics(
    std::span<const double> state, std::span<const double> action) const {
  if (state.size() != 3 || action.size() != 1) {
    throw std::invalid_argument("PendulumEnv: dimension mismatch");
  }
  check_finite(state, "pendulum");
  constexpr double g = 10.0, m = 1.0, l = 1.0;
  constexpr double max_speed = 8.0;

  const double theta = std::atan2(state[1], state[0]);
  const double thdot = state[2];
  const double u = clip(action[0], -spec_.action_limit[0], spec_.action_limit[0]);

  const double w = wrap_angle(theta);
  const double reward = -(w * w + 0.1 * thdot * thdot + 0.001 * u * u);

  double thdot_next = thdot + (1.5 * g / l * std::sin(theta) + 3.0 / (m * l * l) * u) * kDt;
  thdot_next = clip(thdot_next, -max_speed, max_speed);
  const double theta_next = theta + thdot_next * kDt;

  return {{std::cos(theta_next), std::sin(theta_next), thdot_next}, reward};
}

std::vector<double> PendulumEnv::sample_initial(Rng& rng) const {
  const double theta = rng.uniform(-kPi, kPi);
  const double thdot = rng.uniform(-1.0, 1.0);
  return {std::cos(theta), std::sin(theta), thdot};
}

PointMassEnv::PointMassEnv() {
  spec_.name = "pointmass";
  spec_.state_dim = 4;  // (px, py, vx, vy)
  spec_.action_dim = 2;
  spec_.action_limit = {1.0, 1.0};
  spec_.horizon = 200;
}

std::pair<std::vector<double>, double> PointMassEnv::dynamics(
    std::span<const double> state, std::span<const double> action) const {
  if (state.size() != 4 || action.size() != 2) {
    throw std::invalid_argument("PointMassEnv: dimension mismatch");
  }
  check_finite(state, "pointmass");
  const double ax = clip(action[0], -1.0, 1.0);
  const double ay = clip(action[1], -1.0, 1.0);

  const double reward = -(state[0] * state[0] + state[1] * state[1] +
                          0.01 * (ax * ax + ay * ay));

  const double vx = state[2] + ax * kDt;
  const double vy = state[3] + ay * kDt;
  return {{state[0] + vx * kDt, state[1] + vy * kDt, vx, vy}, reward};
}

std::vector<double> PointMassEnv::sample_initial(Rng& rng) const {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0, 0.0};
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  if (name == "pointmass") return std::make_unique<PointMassEnv>();
  throw std::invalid_argument("make_env: unknown environment '" + name + "'");
}

EvalResult evaluate_policy(Env& env, const PolicyFn& policy, int episodes,
                           double gamma, std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  Rng rng(seed);
  double total = 0.0, total_disc = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto state = env.reset(rng);
    double discount = 1.0;
    while (true) {
      const auto action = policy(state);
      auto res = env.step(state, action);
      total += res.reward;
      total_disc += discount * res.reward;
      discount *= gamma;
      state = std::move(res.next_state);
      if (res.done) break;
    }
  }
  const double n = static_cast<double>(episodes);
  return {total / n, total_disc / n};
}

}  // namespace memr
