#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "memr/net.hpp"
#include "memr/replay.hpp"

namespace memr {

// Per-dimension affine standardizer fitted on full-dataset moments.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std;  // floored at 1e-6

  void fit(const std::vector<std::vector<double>>& rows);
  void normalize_into(std::span<const double> x, std::span<double> out) const;
  std::vector<double> normalize(std::span<const double> x) const;
  std::vector<double> denormalize(std::span<const double> z) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);
};

struct DynamicsConfig {
  int ensemble_size = 5;
  std::vector<int> hidden = {64, 64};
  double lr = 1e-3;
  int batch_size = 256;
  int max_epochs = 50;
  int patience = 5;  // epochs without holdout NLL improvement before stopping
  double holdout_fraction = 0.1;
  std::size_t min_train_size = 250;
  bool from_scratch = false;  // reinitialize members at every train() call
};

struct TrainReport {
  std::vector<double> initial_holdout_nll;  // per member, before this round
  std::vector<double> holdout_nll;          // per member, after training
  std::vector<double> holdout_mse;          // per member, original units
  int epochs = 0;                           // longest member
};

// Mean holdout MSE across members; the logged generalization-error estimate.
double validation_error(const TrainReport& report);

// Probabilistic ensemble over (state, action) -> (state delta, reward).
// Members output mean and log-variance in normalized target space with the
// log-variance soft-bounded to [-10, 2]. Rollouts are strictly single-step.
class EnsembleDynamics {
 public:
  EnsembleDynamics(int state_dim, int action_dim, const DynamicsConfig& cfg,
                   Rng& init_rng);

  // Fits every member on its own bootstrap resample of the buffer contents
  // (target = (s'-s, r), shared holdout split, early stopping on holdout
  // NLL). Normalizers are refreshed from the full dataset first.
  TrainReport train(const EnvReplayBuffer& env_buf, Rng& rng);

  // Picks one member uniformly and samples its predictive Gaussian once.
  std::pair<std::vector<double>, double> rollout_one_step(
      std::span<const double> state, std::span<const double> action, Rng& rng) const;

  // Mean / log-variance heads of one member, in normalized target space.
  void predict(int member, std::span<const double> state,
               std::span<const double> action, std::vector<double>& mean,
               std::vector<double>& log_var) const;

  bool trained() const { return trained_; }
  int ensemble_size() const { return static_cast<int>(nets_.size()); }
  int target_dim() const { return state_dim_ + 1; }
  const Normalizer& input_normalizer() const { return in_norm_; }
  const Normalizer& output_normalizer() const { return out_norm_; }
  const DynamicsConfig& config() const { return cfg_; }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  double holdout_stats(std::size_t member, const std::vector<std::vector<double>>& x,
                       const std::vector<std::vector<double>>& y,
                       std::span<const std::size_t> holdout, double* mse_out) const;

  int state_dim_;
  int action_dim_;
  DynamicsConfig cfg_;
  std::vector<Net> nets_;
  std::vector<AdamState> adams_;
  Normalizer in_norm_, out_norm_;
  bool trained_ = false;

  static constexpr double kLogVarMin = -10.0;
  static constexpr double kLogVarMax = 2.0;
};

}  // namespace memr
