#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "memr/net.hpp"
#include "memr/replay.hpp"

namespace memr {

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 3e-4;
  double alpha_lr = 3e-4;
  double init_temperature = 1.0;
  // 0 means "use -action_dim", the usual default.
  double target_entropy = 0.0;
  std::vector<int> hidden = {64, 64};
};

// Soft actor-critic learner with a tanh-squashed Gaussian policy, twin
// critics with EMA targets, and an auto-tuned temperature. Consumes
// importance-weighted model-rollout batches.
class SacAgent {
 public:
  SacAgent(int state_dim, int action_dim, std::vector<double> action_limit,
           const SacConfig& cfg, Rng& init_rng);

  std::vector<double> act(std::span<const double> state, bool deterministic,
                          Rng& rng) const;

  // One weighted TD step per critic toward r + gamma*(min target Q - alpha*log pi).
  // Returns the mean weighted critic loss across the two critics.
  double q_update(std::span<const ModelSample> batch, Rng& rng);

  // One step on E[alpha*log pi(a|s) - min Q(s,a)] through the
  // reparameterized action. Returns the surrogate loss.
  double policy_update(std::span<const std::vector<double>> states, Rng& rng);

  // One step on the log-temperature toward the entropy target. Returns the
  // new temperature.
  double temperature_update(std::span<const std::vector<double>> states, Rng& rng);

  void target_sync(double tau);

  // --- loss heads without optimizer steps (the update methods build on
  // these; also the hooks for gradient verification) ---

  // TD targets for a batch; consumes one noise draw per entry.
  std::vector<double> td_targets(std::span<const ModelSample> batch, Rng& rng) const;

  // Weighted squared TD error of critic 0 or 1 against fixed targets;
  // parameter gradient accumulated into grad_out when nonempty.
  double critic_loss_and_grad(int which, std::span<const ModelSample> batch,
                              std::span<const double> targets,
                              std::span<double> grad_out) const;

  // Actor surrogate under a fixed noise matrix xi_flat (batch-major, one
  // action_dim block per state); policy gradient accumulated into grad_out
  // when nonempty.
  double actor_surrogate(std::span<const std::vector<double>> states,
                         std::span<const double> xi_flat,
                         std::span<double> grad_out) const;

  double temperature() const;
  double target_entropy() const { return target_entropy_; }
  const SacConfig& config() const { return cfg_; }
  int action_dim() const { return action_dim_; }

  // Squashed-Gaussian log-density of a concrete in-bounds action.
  double log_prob_action(std::span<const double> state,
                         std::span<const double> action) const;

  std::span<const double> policy_params() const { return policy_.params(); }
  std::span<double> policy_params_mut() { return policy_.params(); }
  std::span<const double> q_params(int which) const;
  std::span<double> q_params_mut(int which);
  std::span<const double> q_target_params(int which) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  struct PolicyEval {
    std::vector<double> mean, raw_ls, log_std, std, xi, u, action;
    double log_pi = 0.0;
  };

  // Forward through the policy head with a fixed noise draw xi.
  PolicyEval eval_policy(std::span<const double> state,
                         std::span<const double> xi, GradTape* tape) const;

  double critic_value(const Net& q, std::span<const double> state,
                      std::span<const double> action) const;

  int state_dim_;
  int action_dim_;
  std::vector<double> action_limit_;
  SacConfig cfg_;
  double target_entropy_;

  Net policy_, q1_, q2_, q1_target_, q2_target_;
  AdamState policy_adam_, q1_adam_, q2_adam_;
  double log_alpha_;
  AdamState alpha_adam_;
};

}  // namespace memr
