#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "memr/gaussian.hpp"
#include "memr/net.hpp"

namespace memr {

struct ModelPolicyConfig {
  std::vector<int> hidden = {64, 64};
  double lr = 1e-3;
  int minibatch = 128;
};

// Conditional diagonal Gaussian over actions, fitted online to the freshest
// batch of model rollouts. Used only to score sampling priorities, never to
// act.
class ModelDataPolicy {
 public:
  ModelDataPolicy(int state_dim, int action_dim, const ModelPolicyConfig& cfg,
                  Rng& init_rng);

  // d_epochs full passes of minibatch NLL steps over this batch only.
  // Returns the mean per-sample NLL over the batch after the last epoch.
  double fit_online(std::span<const std::vector<double>> states,
                    std::span<const std::vector<double>> actions, int d_epochs,
                    Rng& rng);

  DiagGaussian conditional(std::span<const double> state) const;

  double priority_of(std::span<const double> state,
                     std::span<const double> action) const;

  long fit_count() const { return fit_count_; }
  long gradient_steps() const { return gradient_steps_; }
  bool fitted() const { return fit_count_ > 0; }
  int action_dim() const { return action_dim_; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  int state_dim_;
  int action_dim_;
  ModelPolicyConfig cfg_;
  Net net_;  // state -> (mean, raw log-std)
  AdamState adam_;
  long fit_count_ = 0;
  long gradient_steps_ = 0;
};

}  // namespace memr
