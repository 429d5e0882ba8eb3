#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "memr/dynamics.hpp"
#include "memr/env.hpp"
#include "memr/model_policy.hpp"
#include "memr/replay.hpp"
#include "memr/sac.hpp"

namespace memr {

struct TrainerConfig {
  std::string env_name = "pendulum";
  std::uint64_t seed = 0;

  long total_num_steps = 15000;
  long model_update_freq = 250;
  long rollouts_per_step = 40;  // M
  double alpha = 0.6;
  double beta_start = 0.4;
  double beta_end = 1.0;
  int policy_epochs = 2;    // D
  int policy_updates = 5;   // G
  int batch_size = 40;      // B, at most M
  long model_dataset_size = 4000;  // segments * M
  std::size_t env_buffer_capacity = 100000;
  long initial_random_steps = 1000;
  long eval_interval = 500;
  int eval_episodes = 10;

  double gamma = 0.99;
  double tau = 0.005;
  double sac_lr = 3e-4;
  double alpha_lr = 3e-4;
  double model_lr = 1e-3;
  double policy_model_lr = 1e-3;
  std::vector<int> dynamics_hidden = {64, 64};
  std::vector<int> sac_hidden = {64, 64};
  std::vector<int> policy_model_hidden = {64, 64};
  int ensemble_size = 5;
  int model_batch_size = 256;
  int model_max_epochs = 50;
  int model_patience = 5;
  double model_holdout = 0.1;
  long model_min_train = 250;
  bool model_from_scratch = false;
  int policy_model_minibatch = 128;
  double real_data_fraction = 0.0;  // fraction of each SAC batch drawn from D_env

  void validate() const;        // throws std::invalid_argument
  void apply_paper_scale();     // full-size settings behind --paper-scale
};

struct MetricsRow {
  long step = 0;
  double eval_return = 0.0;
  double discounted_return = 0.0;
  double model_holdout_mse = 0.0;
  double mean_priority = 0.0;
  double knn_entropy = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double temperature = 0.0;
  double wall_clock_s = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_line(const MetricsRow& row);

// Runs the full training loop: per environment step, retrain the model on
// schedule, act, store the transition with its priority, generate one segment
// of M prioritized single-step rollouts, fit the model-data policy on them,
// refresh the sampled priorities, and take G SAC update rounds on
// single-segment batches.
class Trainer {
 public:
  explicit Trainer(const TrainerConfig& cfg);

  // Steps until total_num_steps; returns the accumulated metrics rows.
  const std::vector<MetricsRow>& run();
  // Steps until current_step() == min(step_target, total_num_steps).
  void run_until(long step_target);

  // Metrics rows are streamed to this sink (header included) as produced.
  void set_metrics_stream(std::ostream* os);

  void save_checkpoint(const std::string& path) const;
  static std::unique_ptr<Trainer> load_checkpoint(const std::string& path);

  long current_step() const { return t_; }
  long first_rollout_step() const { return first_rollout_step_; }
  std::uint64_t rollout_count() const { return rollout_count_; }
  std::uint64_t policy_update_count() const { return policy_update_count_; }
  long rollout_rounds() const { return rollout_rounds_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }
  const TrainerConfig& config() const { return cfg_; }
  const EnvReplayBuffer& env_buffer() const { return env_buf_; }
  const SegmentedModelBuffer& model_buffer() const { return model_buf_; }
  const SacAgent& agent() const { return agent_; }
  Env& env() { return *env_; }

  EvalResult evaluate(int episodes, std::uint64_t seed);

 private:
  void step_once();
  void append_metrics_row();
  double model_buffer_entropy(std::uint64_t seed) const;
  double wall_seconds() const;

  TrainerConfig cfg_;
  std::unique_ptr<Env> env_;
  Rng rng_;
  EnvReplayBuffer env_buf_;
  SegmentedModelBuffer model_buf_;
  EnsembleDynamics dynamics_;
  ModelDataPolicy policy_model_;
  SacAgent agent_;
  BetaSchedule beta_;

  long t_ = 0;
  std::vector<double> obs_;
  int episode_step_ = 0;

  std::uint64_t rollout_count_ = 0;
  std::uint64_t policy_update_count_ = 0;
  long rollout_rounds_ = 0;
  long first_rollout_step_ = -1;

  TrainReport last_report_;
  bool has_report_ = false;

  // diagnostics accumulated between metrics rows
  double critic_loss_sum_ = 0.0, actor_loss_sum_ = 0.0;
  long loss_count_ = 0;
  double priority_sum_ = 0.0;
  long priority_count_ = 0;

  std::vector<MetricsRow> metrics_;
  std::ostream* metrics_stream_ = nullptr;
  double wall_accum_ = 0.0;
  std::int64_t run_start_ns_ = -1;
};

}  // namespace memr
