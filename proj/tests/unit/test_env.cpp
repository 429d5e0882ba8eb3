#include <doctest.h>

#include <cmath>
#include <vector>

#include "memr/env.hpp"

using namespace memr;

TEST_SUITE_BEGIN("env");

TEST_CASE("pendulum equilibria and rewards") {
  PendulumEnv env;
  // upright at rest with no torque: fixed point, zero reward
  const std::vector<double> up{1.0, 0.0, 0.0};
  auto [next, reward] = env.dynamics(up, std::vector<double>{0.0});
  CHECK(reward == doctest::Approx(0.0));
  CHECK(next[0] == doctest::Approx(1.0));
  CHECK(next[1] == doctest::Approx(0.0));
  CHECK(next[2] == doctest::Approx(0.0));

  // hanging at rest: reward -pi^2
  const std::vector<double> down{-1.0, std::sin(kPi), 0.0};
  auto [next2, reward2] = env.dynamics(down, std::vector<double>{0.0});
  CHECK(reward2 == doctest::Approx(-kPi * kPi).epsilon(1e-9));
  (void)next2;
}

TEST_CASE("pendulum torque is clipped to its bound") {
  PendulumEnv env;
  const std::vector<double> s{0.0, 1.0, 0.0};
  auto [a_next, a_r] = env.dynamics(s, std::vector<double>{50.0});
  auto [b_next, b_r] = env.dynamics(s, std::vector<double>{2.0});
  CHECK(a_next == b_next);
  CHECK(a_r == b_r);
}

TEST_CASE("dynamics are pure") {
  PendulumEnv pend;
  PointMassEnv pm;
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double th = rng.uniform(-kPi, kPi);
    const std::vector<double> s{std::cos(th), std::sin(th), rng.uniform(-8.0, 8.0)};
    const std::vector<double> a{rng.uniform(-2.0, 2.0)};
    const auto r1 = pend.dynamics(s, a);
    const auto r2 = pend.dynamics(s, a);
    REQUIRE(r1.first == r2.first);
    REQUIRE(r1.second == r2.second);
  }
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> s{rng.uniform(-1, 1), rng.uniform(-1, 1),
                                rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const std::vector<double> a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    REQUIRE(pm.dynamics(s, a) == pm.dynamics(s, a));
  }
}

TEST_CASE("pendulum reward bounds") {
  PendulumEnv env;
  Rng rng(7);
  const double lower = -(kPi * kPi + 0.1 * 64.0 + 0.001 * 4.0);
  for (int i = 0; i < 20000; ++i) {
    const double th = rng.uniform(-kPi, kPi);
    const std::vector<double> s{std::cos(th), std::sin(th), rng.uniform(-8.0, 8.0)};
    const std::vector<double> a{rng.uniform(-2.0, 2.0)};
    const double r = env.dynamics(s, a).second;
    CHECK(r <= 0.0);
    CHECK(r >= lower);
  }
}

TEST_CASE("pendulum energy drift is second order in dt") {
  // with zero torque the continuous flow conserves
  // E = 0.5 thdot^2 + (3g/2) cos th; one Euler step of size dt moves E by
  // O(dt^2), and ten substeps of dt/10 shrink the drift by about 10x
  auto energy = [](double th, double thdot) {
    return 0.5 * thdot * thdot + 15.0 * std::cos(th);
  };
  auto substep = [](double th, double thdot, double dt) {
    const double nd = thdot + 15.0 * std::sin(th) * dt;
    return std::pair<double, double>{th + nd * dt, nd};
  };
  PendulumEnv env;
  Rng rng(11);
  double worst_coarse = 0.0, worst_fine = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double th = rng.uniform(-kPi, kPi);
    const double thdot = rng.uniform(-5.0, 5.0);  // headroom below the clip
    const std::vector<double> s{std::cos(th), std::sin(th), thdot};
    const auto next = env.dynamics(s, std::vector<double>{0.0}).first;
    const double th_next = std::atan2(next[1], next[0]);
    const double e0 = energy(th, thdot);
    worst_coarse = std::max(worst_coarse, std::abs(energy(th_next, next[2]) - e0));

    double fth = th, fdot = thdot;
    for (int k = 0; k < 10; ++k) std::tie(fth, fdot) = substep(fth, fdot, 0.005);
    worst_fine = std::max(worst_fine, std::abs(energy(fth, fdot) - e0));
  }
  CHECK(worst_coarse <= 0.5);               // ~ C * dt^2 with C ~ O(100)
  CHECK(worst_fine <= worst_coarse / 5.0);  // refining dt shrinks the drift
}

TEST_CASE("point mass at the goal is a fixed point") {
  PointMassEnv env;
  const std::vector<double> s{0.0, 0.0, 0.0, 0.0};
  auto [next, reward] = env.dynamics(s, std::vector<double>{0.0, 0.0});
  CHECK(reward == doctest::Approx(0.0));
  CHECK(next == s);
}

TEST_CASE("reset distributions") {
  PendulumEnv pend;
  Rng rng(13);
  double min_th = 1e9, max_th = -1e9, min_v = 1e9, max_v = -1e9;
  double mean_th = 0.0, mean_v = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto s = pend.reset(rng);
    const double th = std::atan2(s[1], s[0]);
    min_th = std::min(min_th, th);
    max_th = std::max(max_th, th);
    min_v = std::min(min_v, s[2]);
    max_v = std::max(max_v, s[2]);
    mean_th += th / n;
    mean_v += s[2] / n;
  }
  CHECK(min_th >= -kPi);
  CHECK(max_th <= kPi);
  CHECK(min_v >= -1.0);
  CHECK(max_v <= 1.0);
  CHECK(std::abs(mean_th) <= 0.1);  // uniform on [-pi, pi]
  CHECK(std::abs(mean_v) <= 0.05);  // uniform on [-1, 1]
  CHECK(max_th - min_th >= 5.0);    // actually spans the range

  // same seed, same initial state
  Rng a(99), b(99);
  CHECK(pend.reset(a) == pend.reset(b));

  PointMassEnv pm;
  Rng rng2(17);
  for (int i = 0; i < 1000; ++i) {
    const auto s = pm.reset(rng2);
    CHECK(std::abs(s[0]) <= 1.0);
    CHECK(std::abs(s[1]) <= 1.0);
    CHECK(s[2] == 0.0);
    CHECK(s[3] == 0.0);
  }
}

TEST_CASE("episodes end exactly at the horizon") {
  PendulumEnv env;
  Rng rng(19);
  auto s = env.reset(rng);
  for (int t = 1; t <= env.spec().horizon; ++t) {
    const auto res = env.step(s, std::vector<double>{0.0});
    CHECK(res.done == (t == env.spec().horizon));
    s = res.next_state;
  }
}

namespace {

// fixed-reward environment for the discounted-sum contract
class ConstantRewardEnv : public Env {
 public:
  ConstantRewardEnv() {
    spec_.name = "constant";
    spec_.state_dim = 1;
    spec_.action_dim = 1;
    spec_.action_limit = {1.0};
    spec_.horizon = 200;
  }
  std::pair<std::vector<double>, double> dynamics(
      std::span<const double> state, std::span<const double>) const override {
    return {{state[0]}, 1.0};
  }

 protected:
  std::vector<double> sample_initial(Rng&) const override { return {0.0}; }
};

}  // namespace

TEST_CASE("evaluate_policy discounted sums") {
  ConstantRewardEnv env;
  PolicyFn zero = [](std::span<const double>) { return std::vector<double>{0.0}; };

  const auto res = evaluate_policy(env, zero, 3, 0.99, 7);
  CHECK(res.mean_return == doctest::Approx(200.0));
  const double closed = (1.0 - std::pow(0.99, 200)) / 0.01;
  CHECK(res.mean_discounted == doctest::Approx(closed).epsilon(1e-12));

  // gamma = 0 keeps only the first reward
  const auto res0 = evaluate_policy(env, zero, 2, 0.0, 7);
  CHECK(res0.mean_discounted == doctest::Approx(1.0));

  // equal seeds, identical results on a real environment
  PendulumEnv pend;
  PolicyFn small = [](std::span<const double> s) {
    return std::vector<double>{0.1 * s[2]};
  };
  const auto r1 = evaluate_policy(pend, small, 3, 0.99, 123);
  const auto r2 = evaluate_policy(pend, small, 3, 0.99, 123);
  CHECK(r1.mean_return == r2.mean_return);
  CHECK(r1.mean_discounted == r2.mean_discounted);
}

TEST_CASE("make_env registry") {
  CHECK(make_env("pendulum")->spec().state_dim == 3);
  CHECK(make_env("pointmass")->spec().action_dim == 2);
  CHECK_THROWS_AS(make_env("cartpole"), std::invalid_argument);
}

TEST_SUITE_END();
