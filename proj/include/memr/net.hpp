#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "memr/math_util.hpp"

namespace memr {

enum class Activation { kIdentity, kRelu, kTanh };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::kIdentity;
};

// Forward record for one pass through a Net; consumed by Net::backward.
struct GradTape {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;   // z = W*a_prev + b per layer
  std::vector<std::vector<double>> post;  // act(z) per layer
  bool consumed = false;
};

// Dense feed-forward network. All parameters live in one flat vector laid out
// as [W0 row-major, b0, W1, b1, ...], which keeps optimizer state, gradient
// checks and serialization over a single contiguous view.
class Net {
 public:
  Net() = default;
  explicit Net(std::vector<LayerSpec> layers);

  // sizes = {in, hidden..., out}; hidden activation on all but the last
  // layer, `output` activation on the last.
  static Net mlp(const std::vector<int>& sizes, Activation hidden,
                 Activation output, Rng& rng);

  void init_uniform(Rng& rng);  // +-1/sqrt(fan_in) per layer

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  std::size_t weight_offset(std::size_t layer) const { return w_off_[layer]; }
  std::size_t bias_offset(std::size_t layer) const { return b_off_[layer]; }

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<double> forward(std::span<const double> x, GradTape& tape) const;

  // Reverse pass for the recorded forward. Parameter gradients are added into
  // param_grad (size param_count()); when input_grad is nonempty it receives
  // d(loss)/d(input), also accumulated. A tape can be consumed once.
  void backward(GradTape& tape, std::span<const double> out_grad,
                std::span<double> param_grad,
                std::span<double> input_grad = {}) const;

  // Little-endian parameter blob with a shape header.
  void save(std::ostream& os) const;
  static Net load(std::istream& is);

 private:
  std::vector<LayerSpec> layers_;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;
};

// Negative log-likelihood of target under N(mean, exp(log_var)), summed over
// dimensions:
//   sum_d 0.5 * ((target_d-mean_d)^2 * exp(-log_var_d) + log_var_d + ln(2*pi))
// Exact gradients are accumulated into d_mean / d_log_var when nonempty.
double gaussian_nll(std::span<const double> mean, std::span<const double> log_var,
                    std::span<const double> target, std::span<double> d_mean = {},
                    std::span<double> d_log_var = {});

// Bias-corrected adaptive-moment optimizer state for one parameter vector.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m, v;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate);

  void apply(std::span<double> params, std::span<const double> grads);

  void save(std::ostream& os) const;
  void load(std::istream& is, std::size_t expected_size);
};

}  // namespace memr
