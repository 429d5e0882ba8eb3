#include "memr/trainer.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "memr/binary_io.hpp"
#include "memr/checkpoint.hpp"

namespace memr {

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

TrainerConfig validated_copy(const TrainerConfig& cfg) {
  cfg.validate();
  return cfg;
}

DynamicsConfig dynamics_config(const TrainerConfig& cfg) {
  DynamicsConfig d;
  d.ensemble_size = cfg.ensemble_size;
  d.hidden = cfg.dynamics_hidden;
  d.lr = cfg.model_lr;
  d.batch_size = cfg.model_batch_size;
  d.max_epochs = cfg.model_max_epochs;
  d.patience = cfg.model_patience;
  d.holdout_fraction = cfg.model_holdout;
  d.min_train_size = static_cast<std::size_t>(cfg.model_min_train);
  d.from_scratch = cfg.model_from_scratch;
  return d;
}

ModelPolicyConfig model_policy_config(const TrainerConfig& cfg) {
  ModelPolicyConfig m;
  m.hidden = cfg.policy_model_hidden;
  m.lr = cfg.policy_model_lr;
  m.minibatch = cfg.policy_model_minibatch;
  return m;
}

SacConfig sac_config(const TrainerConfig& cfg) {
  SacConfig s;
  s.gamma = cfg.gamma;
  s.tau = cfg.tau;
  s.lr = cfg.sac_lr;
  s.alpha_lr = cfg.alpha_lr;
  s.hidden = cfg.sac_hidden;
  return s;
}

void write_int_vec(std::ostream& os, const std::vector<int>& v) {
  io::write_u64(os, v.size());
  for (int x : v) io::write_i64(os, x);
}

std::vector<int> read_int_vec(std::istream& is, const char* what) {
  const std::uint64_t n = io::read_u64(is, what);
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(io::read_i64(is, what));
  return v;
}

void write_config(std::ostream& os, const TrainerConfig& c) {
  io::write_string(os, c.env_name);
  io::write_u64(os, c.seed);
  io::write_i64(os, c.total_num_steps);
  io::write_i64(os, c.model_update_freq);
  io::write_i64(os, c.rollouts_per_step);
  io::write_f64(os, c.alpha);
  io::write_f64(os, c.beta_start);
  io::write_f64(os, c.beta_end);
  io::write_i64(os, c.policy_epochs);
  io::write_i64(os, c.policy_updates);
  io::write_i64(os, c.batch_size);
  io::write_i64(os, c.model_dataset_size);
  io::write_u64(os, c.env_buffer_capacity);
  io::write_i64(os, c.initial_random_steps);
  io::write_i64(os, c.eval_interval);
  io::write_i64(os, c.eval_episodes);
  io::write_f64(os, c.gamma);
  io::write_f64(os, c.tau);
  io::write_f64(os, c.sac_lr);
  io::write_f64(os, c.alpha_lr);
  io::write_f64(os, c.model_lr);
  io::write_f64(os, c.policy_model_lr);
  write_int_vec(os, c.dynamics_hidden);
  write_int_vec(os, c.sac_hidden);
  write_int_vec(os, c.policy_model_hidden);
  io::write_i64(os, c.ensemble_size);
  io::write_i64(os, c.model_batch_size);
  io::write_i64(os, c.model_max_epochs);
  io::write_i64(os, c.model_patience);
  io::write_f64(os, c.model_holdout);
  io::write_i64(os, c.model_min_train);
  io::write_u32(os, c.model_from_scratch ? 1 : 0);
  io::write_i64(os, c.policy_model_minibatch);
  io::write_f64(os, c.real_data_fraction);
}

TrainerConfig read_config(std::istream& is) {
  TrainerConfig c;
  c.env_name = io::read_string(is, "config env_name");
  c.seed = io::read_u64(is, "config seed");
  c.total_num_steps = io::read_i64(is, "config total_num_steps");
  c.model_update_freq = io::read_i64(is, "config model_update_freq");
  c.rollouts_per_step = io::read_i64(is, "config rollouts_per_step");
  c.alpha = io::read_f64(is, "config alpha");
  c.beta_start = io::read_f64(is, "config beta_start");
  c.beta_end = io::read_f64(is, "config beta_end");
  c.policy_epochs = static_cast<int>(io::read_i64(is, "config policy_epochs"));
  c.policy_updates = static_cast<int>(io::read_i64(is, "config policy_updates"));
  c.batch_size = static_cast<int>(io::read_i64(is, "config batch_size"));
  c.model_dataset_size = io::read_i64(is, "config model_dataset_size");
  c.env_buffer_capacity = io::read_u64(is, "config env_buffer_capacity");
  c.initial_random_steps = io::read_i64(is, "config initial_random_steps");
  c.eval_interval = io::read_i64(is, "config eval_interval");
  c.eval_episodes = static_cast<int>(io::read_i64(is, "config eval_episodes"));
  c.gamma = io::read_f64(is, "config gamma");
  c.tau = io::read_f64(is, "config tau");
  c.sac_lr = io::read_f64(is, "config sac_lr");
  c.alpha_lr = io::read_f64(is, "config alpha_lr");
  c.model_lr = io::read_f64(is, "config model_lr");
  c.policy_model_lr = io::read_f64(is, "config policy_model_lr");
  c.dynamics_hidden = read_int_vec(is, "config dynamics_hidden");
  c.sac_hidden = read_int_vec(is, "config sac_hidden");
  c.policy_model_hidden = read_int_vec(is, "config policy_model_hidden");
  c.ensemble_size = static_cast<int>(io::read_i64(is, "config ensemble_size"));
  c.model_batch_size = static_cast<int>(io::read_i64(is, "config model_batch_size"));
  c.model_max_epochs = static_cast<int>(io::read_i64(is, "config model_max_epochs"));
  c.model_patience = static_cast<int>(io::read_i64(is, "config model_patience"));
  c.model_holdout = io::read_f64(is, "config model_holdout");
  c.model_min_train = io::read_i64(is, "config model_min_train");
  c.model_from_scratch = io::read_u32(is, "config model_from_scratch") != 0;
  c.policy_model_minibatch =
      static_cast<int>(io::read_i64(is, "config policy_model_minibatch"));
  c.real_data_fraction = io::read_f64(is, "config real_data_fraction");
  return c;
}

}  // namespace

void TrainerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (env_name != "pendulum" && env_name != "pointmass") {
    fail("unknown env '" + env_name + "'");
  }
  if (total_num_steps < 0) fail("total_num_steps must be >= 0");
  if (model_update_freq < 1) fail("model_update_freq must be >= 1");
  if (rollouts_per_step < 1) fail("rollouts_per_step must be >= 1");
  if (alpha < 0.0 || alpha > 1.0) fail("alpha must be in [0, 1]");
  if (beta_start < 0.0 || beta_start > 1.0 || beta_end < 0.0 || beta_end > 1.0) {
    fail("beta must be in [0, 1]");
  }
  if (beta_end < beta_start) fail("beta_end must be >= beta_start");
  if (policy_epochs < 1) fail("policy_epochs must be >= 1");
  if (policy_updates < 1) fail("policy_updates must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (batch_size > rollouts_per_step) {
    fail("batch_size must be <= rollouts_per_step (batches never span segments)");
  }
  if (model_dataset_size < rollouts_per_step) {
    fail("model_dataset_size must be >= rollouts_per_step");
  }
  if (model_dataset_size % rollouts_per_step != 0) {
    fail("model_dataset_size must be divisible by rollouts_per_step");
  }
  if (env_buffer_capacity < 1) fail("env_buffer_capacity must be >= 1");
  if (initial_random_steps < 0) fail("initial_random_steps must be >= 0");
  if (eval_interval < 1) fail("eval_interval must be >= 1");
  if (eval_episodes < 1) fail("eval_episodes must be >= 1");
  if (!(gamma > 0.0) || gamma >= 1.0) fail("gamma must be in (0, 1)");
  if (!(tau > 0.0) || tau > 1.0) fail("tau must be in (0, 1]");
  if (!(sac_lr > 0.0) || !(alpha_lr > 0.0) || !(model_lr > 0.0) || !(policy_model_lr > 0.0)) {
    fail("learning rates must be positive");
  }
  if (ensemble_size < 1) fail("ensemble_size must be >= 1");
  if (model_batch_size < 1) fail("model_batch_size must be >= 1");
  if (model_max_epochs < 1) fail("model_max_epochs must be >= 1");
  if (model_patience < 1) fail("model_patience must be >= 1");
  if (!(model_holdout > 0.0) || model_holdout > 0.5) fail("model_holdout must be in (0, 0.5]");
  if (model_min_train < 2) fail("model_min_train must be >= 2");
  if (policy_model_minibatch < 1) fail("policy_model_minibatch must be >= 1");
  if (real_data_fraction < 0.0 || real_data_fraction > 1.0) {
    fail("real_data_fraction must be in [0, 1]");
  }
}

void TrainerConfig::apply_paper_scale() {
  total_num_steps = 400000;
  rollouts_per_step = 400;
  batch_size = 256;
  model_dataset_size = 1000000;
  env_buffer_capacity = 1000000;
  dynamics_hidden = {200, 200, 200, 200};
  sac_hidden = {256, 256};
  eval_interval = 1000;
}

std::string metrics_csv_header() {
  return "step,eval_return,discounted_return,model_holdout_mse,mean_priority,"
         "knn_entropy,critic_loss,actor_loss,temperature,wall_clock_s";
}

std::string metrics_csv_line(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.3f", r.step,
                r.eval_return, r.discounted_return, r.model_holdout_mse, r.mean_priority,
                r.knn_entropy, r.critic_loss, r.actor_loss, r.temperature, r.wall_clock_s);
  return buf;
}

Trainer::Trainer(const TrainerConfig& cfg)
    : cfg_(validated_copy(cfg)),
      env_(make_env(cfg_.env_name)),
      rng_(cfg_.seed),
      env_buf_(cfg_.env_buffer_capacity, cfg_.alpha),
      model_buf_(static_cast<std::size_t>(cfg_.rollouts_per_step),
                 static_cast<std::size_t>(cfg_.model_dataset_size / cfg_.rollouts_per_step)),
      dynamics_(env_->spec().state_dim, env_->spec().action_dim, dynamics_config(cfg_), rng_),
      policy_model_(env_->spec().state_dim, env_->spec().action_dim,
                    model_policy_config(cfg_), rng_),
      agent_(env_->spec().state_dim, env_->spec().action_dim, env_->spec().action_limit,
             sac_config(cfg_), rng_),
      beta_{cfg_.beta_start, cfg_.beta_end, cfg_.total_num_steps} {
  obs_ = env_->reset(rng_);
}

void Trainer::set_metrics_stream(std::ostream* os) { metrics_stream_ = os; }

double Trainer::wall_seconds() const {
  if (run_start_ns_ < 0) return wall_accum_;
  return wall_accum_ + static_cast<double>(now_ns() - run_start_ns_) * 1e-9;
}

const std::vector<MetricsRow>& Trainer::run() {
  run_until(cfg_.total_num_steps);
  return metrics_;
}

void Trainer::run_until(long step_target) {
  const long target = std::min(step_target, cfg_.total_num_steps);
  run_start_ns_ = now_ns();
  while (t_ < target) step_once();
  wall_accum_ = wall_seconds();
  run_start_ns_ = -1;
}

void Trainer::step_once() {
  ++t_;
  const auto& spec = env_->spec();
  const int ad = spec.action_dim;

  // Retrain the model on schedule once warmup data exists (line 4-5).
  if (t_ >= cfg_.initial_random_steps && t_ % cfg_.model_update_freq == 0 &&
      env_buf_.size() >= static_cast<std::size_t>(cfg_.model_min_train)) {
    last_report_ = dynamics_.train(env_buf_, rng_);
    has_report_ = true;
  }

  // Act in the real environment (line 7). Warmup steps act uniformly.
  std::vector<double> action(ad);
  if (t_ <= cfg_.initial_random_steps) {
    for (int d = 0; d < ad; ++d) {
      action[d] = rng_.uniform(-spec.action_limit[d], spec.action_limit[d]);
    }
  } else {
    action = agent_.act(obs_, false, rng_);
  }
  auto [next_state, reward] = env_->dynamics(obs_, action);
  ++episode_step_;
  const bool done = episode_step_ >= spec.horizon;

  // Score and store the real transition (line 8). Until the first fit of the
  // model-data policy, every transition enters at the uniform default.
  EnvTransition tr;
  tr.state = obs_;
  tr.action = action;
  tr.next_state = next_state;
  tr.reward = reward;
  tr.done = done;
  tr.priority = policy_model_.fitted() ? policy_model_.priority_of(obs_, action) : 1.0;
  env_buf_.add(std::move(tr));

  if (dynamics_.trained()) {
    const std::size_t m = static_cast<std::size_t>(cfg_.rollouts_per_step);
    const double beta = beta_.at(t_);

    // Prioritized state sampling with IS weights (lines 10-11), fresh policy
    // actions and single-step rollouts (line 12).
    auto sampled = env_buf_.sample_states(m, beta, rng_);
    std::vector<ModelSample> segment;
    segment.reserve(m);
    std::vector<std::vector<double>> states(m), actions(m);
    std::vector<std::size_t> indices(m);
    std::vector<std::uint64_t> rounds(m);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& s = sampled[j];
      auto a = agent_.act(s.state, false, rng_);
      auto [pred_next, pred_reward] = dynamics_.rollout_one_step(s.state, a, rng_);
      ModelSample ms;
      ms.state = s.state;
      ms.action = a;
      ms.next_state = std::move(pred_next);
      ms.reward = pred_reward;
      ms.weight = s.weight;
      segment.push_back(std::move(ms));
      states[j] = s.state;
      actions[j] = std::move(a);
      indices[j] = s.index;
      rounds[j] = s.round;
    }
    model_buf_.push_segment(std::move(segment));  // line 14

    // Online fit of the model-data policy on exactly this batch (line 15).
    policy_model_.fit_online(states, actions, cfg_.policy_epochs, rng_);

    // Refresh the priorities of the states just sampled (line 16).
    std::vector<double> new_priorities(m);
    for (std::size_t j = 0; j < m; ++j) {
      new_priorities[j] = policy_model_.priority_of(states[j], actions[j]);
      priority_sum_ += std::max(env_buf_.eps(), new_priorities[j]);
      ++priority_count_;
    }
    env_buf_.update_priorities(indices, new_priorities, rounds);
#ifndef NDEBUG
    assert(env_buf_.round_of(indices[0]) != rounds[0] ||
           env_buf_.at(indices[0]).priority ==
               std::max(env_buf_.eps(), new_priorities[0]));
#endif

    rollout_count_ += m;
    ++rollout_rounds_;
    if (first_rollout_step_ < 0) first_rollout_step_ = t_;

    // G SAC rounds, each on one single-segment batch (lines 17-21).
    const std::size_t b = static_cast<std::size_t>(cfg_.batch_size);
    std::size_t n_real = 0;
    if (cfg_.real_data_fraction > 0.0) {
      n_real = std::min<std::size_t>(
          b, static_cast<std::size_t>(std::llround(cfg_.real_data_fraction *
                                                   static_cast<double>(b))));
    }
    for (int g = 0; g < cfg_.policy_updates; ++g) {
      std::vector<ModelSample> batch;
      if (b > n_real) batch = model_buf_.sample_batch(b - n_real, rng_);
      for (std::size_t k = 0; k < n_real; ++k) {
        const auto& real = env_buf_.at(rng_.uniform_index(env_buf_.size()));
        ModelSample ms;
        ms.state = real.state;
        ms.action = real.action;
        ms.next_state = real.next_state;
        ms.reward = real.reward;
        ms.weight = 1.0;
        batch.push_back(std::move(ms));
      }
      std::vector<std::vector<double>> batch_states;
      batch_states.reserve(batch.size());
      for (const auto& item : batch) batch_states.push_back(item.state);

      critic_loss_sum_ += agent_.q_update(batch, rng_);
      actor_loss_sum_ += agent_.policy_update(batch_states, rng_);
      agent_.temperature_update(batch_states, rng_);
      agent_.target_sync(cfg_.tau);
      ++policy_update_count_;
      ++loss_count_;
    }
  }

  if (done) {
    obs_ = env_->reset(rng_);
    episode_step_ = 0;
  } else {
    obs_ = std::move(next_state);
  }

  if (t_ % cfg_.eval_interval == 0) append_metrics_row();
}

EvalResult Trainer::evaluate(int episodes, std::uint64_t seed) {
  Rng unused(0);
  PolicyFn fn = [this, &unused](std::span<const double> s) {
    return agent_.act(s, true, unused);
  };
  return evaluate_policy(*env_, fn, episodes, cfg_.gamma, seed);
}

double Trainer::model_buffer_entropy(std::uint64_t seed) const {
  const std::size_t total = model_buf_.total_size();
  if (total < 8) return 0.0;
  const std::size_t m = static_cast<std::size_t>(cfg_.rollouts_per_step);
  Rng rng(seed);
  std::vector<std::size_t> flat(total);
  std::iota(flat.begin(), flat.end(), 0);
  const std::size_t want = std::min<std::size_t>(512, total);
  for (std::size_t j = 0; j < want; ++j) {
    std::swap(flat[j], flat[j + rng.uniform_index(total - j)]);
  }
  // Joint (s, a) vectors standardized by the real-data input scales, so the
  // diagnostic is comparable across prioritization settings.
  const auto& norm = dynamics_.input_normalizer();
  std::vector<std::vector<double>> points;
  points.reserve(want);
  std::vector<double> joint;
  for (std::size_t j = 0; j < want; ++j) {
    const auto& seg = model_buf_.segment(flat[j] / m);
    const auto& s = seg[flat[j] % m];
    joint.clear();
    joint.insert(joint.end(), s.state.begin(), s.state.end());
    joint.insert(joint.end(), s.action.begin(), s.action.end());
    points.push_back(norm.normalize(joint));
  }
  return knn_entropy(points, 3);
}

void Trainer::append_metrics_row() {
  const std::uint64_t eval_seed =
      cfg_.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(t_ + 1));
  const auto ev = evaluate(cfg_.eval_episodes, eval_seed);

  MetricsRow row;
  row.step = t_;
  row.eval_return = ev.mean_return;
  row.discounted_return = ev.mean_discounted;
  row.model_holdout_mse = has_report_ ? validation_error(last_report_) : 0.0;
  row.mean_priority =
      priority_count_ > 0 ? priority_sum_ / static_cast<double>(priority_count_) : 0.0;
  row.knn_entropy = model_buffer_entropy(eval_seed + 1);
  row.critic_loss =
      loss_count_ > 0 ? critic_loss_sum_ / static_cast<double>(loss_count_) : 0.0;
  row.actor_loss =
      loss_count_ > 0 ? actor_loss_sum_ / static_cast<double>(loss_count_) : 0.0;
  row.temperature = agent_.temperature();
  row.wall_clock_s = wall_seconds();
  metrics_.push_back(row);
  if (metrics_stream_) {
    *metrics_stream_ << metrics_csv_line(row) << '\n';
    metrics_stream_->flush();
  }
  critic_loss_sum_ = actor_loss_sum_ = 0.0;
  loss_count_ = 0;
  priority_sum_ = 0.0;
  priority_count_ = 0;
}

void Trainer::save_checkpoint(const std::string& path) const {
  CheckpointWriter w;
  write_config(w.add_section("config"), cfg_);

  auto& counters = w.add_section("counters");
  io::write_i64(counters, t_);
  io::write_i64(counters, episode_step_);
  io::write_u64(counters, rollout_count_);
  io::write_u64(counters, policy_update_count_);
  io::write_i64(counters, rollout_rounds_);
  io::write_i64(counters, first_rollout_step_);
  io::write_f64(counters, wall_seconds());
  io::write_f64_vec(counters, obs_);
  io::write_f64(counters, critic_loss_sum_);
  io::write_f64(counters, actor_loss_sum_);
  io::write_i64(counters, loss_count_);
  io::write_f64(counters, priority_sum_);
  io::write_i64(counters, priority_count_);

  auto& report = w.add_section("train_report");
  io::write_u32(report, has_report_ ? 1 : 0);
  io::write_f64_vec(report, last_report_.initial_holdout_nll);
  io::write_f64_vec(report, last_report_.holdout_nll);
  io::write_f64_vec(report, last_report_.holdout_mse);
  io::write_i64(report, last_report_.epochs);

  rng_.save(w.add_section("rng"));
  agent_.save(w.add_section("agent"));
  dynamics_.save(w.add_section("dynamics"));
  policy_model_.save(w.add_section("policy_model"));
  env_buf_.save(w.add_section("env_buffer"));
  model_buf_.save(w.add_section("model_buffer"));

  auto& metrics = w.add_section("metrics");
  io::write_u64(metrics, metrics_.size());
  for (const auto& r : metrics_) {
    io::write_i64(metrics, r.step);
    io::write_f64(metrics, r.eval_return);
    io::write_f64(metrics, r.discounted_return);
    io::write_f64(metrics, r.model_holdout_mse);
    io::write_f64(metrics, r.mean_priority);
    io::write_f64(metrics, r.knn_entropy);
    io::write_f64(metrics, r.critic_loss);
    io::write_f64(metrics, r.actor_loss);
    io::write_f64(metrics, r.temperature);
    io::write_f64(metrics, r.wall_clock_s);
  }

  w.write(path);
}

std::unique_ptr<Trainer> Trainer::load_checkpoint(const std::string& path) {
  CheckpointReader reader(path);

  auto config_is = reader.section("config");
  const TrainerConfig cfg = read_config(config_is);
  auto trainer = std::make_unique<Trainer>(cfg);

  auto counters = reader.section("counters");
  trainer->t_ = io::read_i64(counters, "counters t");
  trainer->episode_step_ = static_cast<int>(io::read_i64(counters, "counters episode step"));
  trainer->rollout_count_ = io::read_u64(counters, "counters rollouts");
  trainer->policy_update_count_ = io::read_u64(counters, "counters policy updates");
  trainer->rollout_rounds_ = io::read_i64(counters, "counters rollout rounds");
  trainer->first_rollout_step_ = io::read_i64(counters, "counters first rollout step");
  trainer->wall_accum_ = io::read_f64(counters, "counters wall clock");
  trainer->obs_ = io::read_f64_vec(counters, "counters observation");
  trainer->critic_loss_sum_ = io::read_f64(counters, "counters critic loss sum");
  trainer->actor_loss_sum_ = io::read_f64(counters, "counters actor loss sum");
  trainer->loss_count_ = io::read_i64(counters, "counters loss count");
  trainer->priority_sum_ = io::read_f64(counters, "counters priority sum");
  trainer->priority_count_ = io::read_i64(counters, "counters priority count");
  if (trainer->obs_.size() != static_cast<std::size_t>(trainer->env_->spec().state_dim)) {
    throw std::runtime_error("checkpoint: observation dimension mismatch");
  }

  auto report = reader.section("train_report");
  trainer->has_report_ = io::read_u32(report, "report flag") != 0;
  trainer->last_report_.initial_holdout_nll = io::read_f64_vec(report, "report initial nll");
  trainer->last_report_.holdout_nll = io::read_f64_vec(report, "report nll");
  trainer->last_report_.holdout_mse = io::read_f64_vec(report, "report mse");
  trainer->last_report_.epochs = static_cast<int>(io::read_i64(report, "report epochs"));

  auto rng_is = reader.section("rng");
  trainer->rng_.load(rng_is);
  auto agent_is = reader.section("agent");
  trainer->agent_.load(agent_is);
  auto dyn_is = reader.section("dynamics");
  trainer->dynamics_.load(dyn_is);
  auto pm_is = reader.section("policy_model");
  trainer->policy_model_.load(pm_is);
  auto env_is = reader.section("env_buffer");
  trainer->env_buf_ = EnvReplayBuffer::load(env_is);
  auto model_is = reader.section("model_buffer");
  trainer->model_buf_ = SegmentedModelBuffer::load(model_is);

  auto metrics = reader.section("metrics");
  const std::uint64_t rows = io::read_u64(metrics, "metrics row count");
  trainer->metrics_.clear();
  for (std::uint64_t i = 0; i < rows; ++i) {
    MetricsRow r;
    r.step = io::read_i64(metrics, "metrics step");
    r.eval_return = io::read_f64(metrics, "metrics eval return");
    r.discounted_return = io::read_f64(metrics, "metrics discounted return");
    r.model_holdout_mse = io::read_f64(metrics, "metrics holdout mse");
    r.mean_priority = io::read_f64(metrics, "metrics mean priority");
    r.knn_entropy = io::read_f64(metrics, "metrics knn entropy");
    r.critic_loss = io::read_f64(metrics, "metrics critic loss");
    r.actor_loss = io::read_f64(metrics, "metrics actor loss");
    r.temperature = io::read_f64(metrics, "metrics temperature");
    r.wall_clock_s = io::read_f64(metrics, "metrics wall clock");
    trainer->metrics_.push_back(r);
  }
  return trainer;
}

}  // namespace memr
