#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "memr/dynamics.hpp"

using namespace memr;

namespace {

DynamicsConfig small_config() {
  DynamicsConfig cfg;
  cfg.ensemble_size = 2;
  cfg.hidden = {32, 32};
  cfg.max_epochs = 60;
  cfg.patience = 8;
  cfg.min_train_size = 100;
  return cfg;
}

// s in R^2, a in R^1, next = A s + B a, reward = c . s
EnvReplayBuffer linear_system_buffer(int n, Rng& rng) {
  EnvReplayBuffer buf(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    EnvTransition t;
    t.state = {rng.normal(), rng.normal()};
    t.action = {rng.uniform(-1.0, 1.0)};
    t.next_state = {0.9 * t.state[0] + 0.1 * t.action[0],
                    0.9 * t.state[1] - 0.05 * t.action[0]};
    t.reward = 0.3 * t.state[0] - 0.2 * t.state[1];
    buf.add(std::move(t));
  }
  return buf;
}

EnvReplayBuffer identity_system_buffer(int n, Rng& rng) {
  EnvReplayBuffer buf(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    EnvTransition t;
    t.state = {rng.normal(), rng.normal()};
    t.action = {rng.uniform(-1.0, 1.0)};
    t.next_state = t.state;
    t.reward = 0.0;
    buf.add(std::move(t));
  }
  return buf;
}

}  // namespace

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("normalizer roundtrip is identity") {
  Rng rng(3);
  std::vector<std::vector<double>> rows(200, std::vector<double>(4));
  for (auto& r : rows) {
    for (auto& v : r) v = rng.normal(3.0, 7.0);
  }
  Normalizer norm;
  norm.fit(rows);
  for (int i = 0; i < 50; ++i) {
    const auto& x = rows[static_cast<std::size_t>(i)];
    const auto back = norm.denormalize(norm.normalize(x));
    for (std::size_t d = 0; d < x.size(); ++d) {
      CHECK(back[d] == doctest::Approx(x[d]).epsilon(1e-9));
    }
  }
  // constant column gets the floor, not a zero divide
  std::vector<std::vector<double>> flat(50, std::vector<double>{2.0});
  Normalizer nf;
  nf.fit(flat);
  CHECK(nf.std[0] >= 1e-6);
  CHECK(std::isfinite(nf.normalize(std::vector<double>{2.0})[0]));
}

TEST_CASE("identity dynamics are learned to tight holdout MSE") {
  Rng rng(5);
  auto buf = identity_system_buffer(2000, rng);
  EnsembleDynamics model(2, 1, small_config(), rng);
  const auto report = model.train(buf, rng);
  CHECK(validation_error(report) <= 1e-3);
  CHECK(report.epochs >= 1);

  // trained predictive stds collapse toward the floor on deterministic data
  std::vector<double> mean, log_var;
  double max_std = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> s{rng.normal(), rng.normal()};
    const std::vector<double> a{rng.uniform(-1.0, 1.0)};
    model.predict(0, s, a, mean, log_var);
    for (double lv : log_var) {
      CHECK(lv >= -10.0 - 1e-9);
      CHECK(lv <= 2.0 + 1e-9);
      max_std = std::max(max_std, std::exp(0.5 * lv));
    }
  }
  CHECK(max_std <= 10.0 * std::exp(-5.0));  // within 10x of the variance floor
}

TEST_CASE("linear dynamics are learned to tight holdout MSE") {
  Rng rng(7);
  auto buf = linear_system_buffer(2000, rng);
  EnsembleDynamics model(2, 1, small_config(), rng);
  const auto report = model.train(buf, rng);
  CHECK(validation_error(report) <= 1e-3);
}

TEST_CASE("training improves holdout NLL") {
  Rng rng(9);
  auto buf = linear_system_buffer(1000, rng);
  DynamicsConfig cfg = small_config();
  cfg.max_epochs = 10;
  EnsembleDynamics model(2, 1, cfg, rng);
  const auto report = model.train(buf, rng);
  for (std::size_t e = 0; e < report.holdout_nll.size(); ++e) {
    CHECK(report.holdout_nll[e] < report.initial_holdout_nll[e]);
    CHECK(std::isfinite(report.holdout_nll[e]));
    CHECK(report.holdout_mse[e] >= 0.0);
  }
}

TEST_CASE("train demands enough data") {
  Rng rng(11);
  auto buf = linear_system_buffer(50, rng);
  EnsembleDynamics model(2, 1, small_config(), rng);
  CHECK_THROWS_AS(model.train(buf, rng), std::invalid_argument);
}

TEST_CASE("rollout requires a trained model and is seed-deterministic") {
  Rng rng(13);
  EnsembleDynamics model(2, 1, small_config(), rng);
  Rng r1(77);
  CHECK_THROWS_AS(
      model.rollout_one_step(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0}, r1),
      std::logic_error);

  auto buf = identity_system_buffer(1200, rng);
  model.train(buf, rng);
  const std::vector<double> s{0.25, -0.5};
  const std::vector<double> a{0.3};
  Rng ra(123), rb(123);
  const auto out_a = model.rollout_one_step(s, a, ra);
  const auto out_b = model.rollout_one_step(s, a, rb);
  CHECK(out_a.first == out_b.first);
  CHECK(out_a.second == out_b.second);

  // identity-trained model keeps next close to s
  Rng rc(5);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto [next, reward] = model.rollout_one_step(s, a, rc);
    worst = std::max({worst, std::abs(next[0] - s[0]), std::abs(next[1] - s[1])});
    CHECK(std::abs(reward) <= 0.2);
  }
  CHECK(worst <= 0.2);
}

TEST_CASE("single-member ensembles have no member-choice randomness") {
  Rng rng(17);
  DynamicsConfig cfg = small_config();
  cfg.ensemble_size = 1;
  cfg.max_epochs = 5;
  EnsembleDynamics model(2, 1, cfg, rng);
  auto buf = identity_system_buffer(500, rng);
  model.train(buf, rng);
  CHECK(model.ensemble_size() == 1);
  Rng ra(9), rb(9);
  const auto a = model.rollout_one_step(std::vector<double>{0.1, 0.2},
                                        std::vector<double>{0.0}, ra);
  const auto b = model.rollout_one_step(std::vector<double>{0.1, 0.2},
                                        std::vector<double>{0.0}, rb);
  CHECK(a.first == b.first);
}

TEST_CASE("validation_error on hand-made reports") {
  TrainReport perfect;
  perfect.holdout_mse = {0.0, 0.0};
  CHECK(validation_error(perfect) == 0.0);
  TrainReport mixed;
  mixed.holdout_mse = {0.5, 1.5};
  CHECK(validation_error(mixed) == doctest::Approx(1.0));
}

TEST_CASE("ensemble serialization round trips") {
  Rng rng(19);
  DynamicsConfig cfg = small_config();
  cfg.max_epochs = 3;
  EnsembleDynamics model(2, 1, cfg, rng);
  auto buf = linear_system_buffer(400, rng);
  model.train(buf, rng);

  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  model.save(ss);
  EnsembleDynamics restored(2, 1, cfg, rng);
  restored.load(ss);
  CHECK(restored.trained());
  Rng ra(4), rb(4);
  const auto a = model.rollout_one_step(std::vector<double>{0.3, 0.4},
                                        std::vector<double>{-0.2}, ra);
  const auto b = restored.rollout_one_step(std::vector<double>{0.3, 0.4},
                                           std::vector<double>{-0.2}, rb);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_SUITE_END();
