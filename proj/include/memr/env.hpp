#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memr/math_util.hpp"

namespace memr {

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<double> action_limit;  // symmetric +-limit per dimension
  int horizon = 200;
};

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool done = false;  // true only when the horizon is reached
};

// Deterministic continuous-control environment. Transitions are pure
// functions of (state, action); only the episode clock is stateful.
class Env {
 public:
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  std::vector<double> reset(Rng& rng) {
    t_ = 0;
    return sample_initial(rng);
  }

  StepResult step(std::span<const double> state, std::span<const double> action) {
    auto [next, reward] = dynamics(state, action);
    ++t_;
    return {std::move(next), reward, t_ >= spec_.horizon};
  }

  // Pure transition function; actions outside the bounds are clipped.
  virtual std::pair<std::vector<double>, double> dynamics(
      std::span<const double> state, std::span<const double> action) const = 0;

 protected:
  virtual std::vector<double> sample_initial(Rng& rng) const = 0;

  EnvSpec spec_;
  int t_ = 0;
};

// Torque-limited pendulum swing-up. Observation (cos th, sin th, thdot);
// the angle-wrap discontinuity never reaches the function approximators.
class PendulumEnv : public Env {
 public:
  PendulumEnv();
  std::pair<std::vector<double>, double> dynamics(
      std::span<const double> state, std::span<const double> action) const override;

  static double wrap_angle(double theta);  // maps into (-pi, pi]

 protected:
  std::vector<double> sample_initial(Rng& rng) const override;
};

// 2-D double integrator steering to the origin.
class PointMassEnv : public Env {
 public:
  PointMassEnv();
  std::pair<std::vector<double>, double> dynamics(
      std::span<const double> state, std::span<const double> action) const override;

 protected:
  std::vector<double> sample_initial(Rng& rng) const override;
};

// Environments are selected by name: "pendulum" or "pointmass".
std::unique_ptr<Env> make_env(const std::string& name);

using PolicyFn = std::function<std::vector<double>(std::span<const double>)>;

struct EvalResult {
  double mean_return = 0.0;      // undiscounted, truncated at the horizon
  double mean_discounted = 0.0;  // sum of gamma^t * r_t
};

EvalResult evaluate_policy(Env& env, const PolicyFn& policy, int episodes,
                           double gamma, std::uint64_t seed);

}  // namespace memr
