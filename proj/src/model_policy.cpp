#include "memr/model_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "memr/binary_io.hpp"

namespace memr {

namespace {
// Emitted std stays in [1e-3, e^2].
const SoftBound kLogStdBound{std::log(kStdFloor), 2.0};
}  // namespace

ModelDataPolicy::ModelDataPolicy(int state_dim, int action_dim,
                                 const ModelPolicyConfig& cfg, Rng& init_rng)
    : state_dim_(state_dim), action_dim_(action_dim), cfg_(cfg) {
  if (state_dim < 1 || action_dim < 1) {
    throw std::invalid_argument("ModelDataPolicy: dimensions must be positive");
  }
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2 * action_dim);
  net_ = Net::mlp(sizes, Activation::kTanh, Activation::kIdentity, init_rng);
  adam_ = AdamState(net_.param_count(), cfg.lr);
}

double ModelDataPolicy::fit_online(std::span<const std::vector<double>> states,
                                   std::span<const std::vector<double>> actions,
                                   int d_epochs, Rng& rng) {
  if (states.empty() || states.size() != actions.size()) {
    throw std::invalid_argument("fit_online: batch must be nonempty with matched lengths");
  }
  if (d_epochs < 1) throw std::invalid_argument("fit_online: d_epochs must be >= 1");
  const std::size_t n = states.size();
  const int ad = action_dim_;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad, d_mean, d_log_var, out_grad, mean, log_var;
  GradTape tape;
  for (int epoch = 0; epoch < d_epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_index(i + 1)]);
    }
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(cfg_.minibatch)) {
      const std::size_t stop =
          std::min(n, start + static_cast<std::size_t>(cfg_.minibatch));
      const double scale = 1.0 / static_cast<double>(stop - start);
      grad.assign(net_.param_count(), 0.0);
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t i = order[bi];
        const auto out = net_.forward(states[i], tape);
        mean.assign(out.begin(), out.begin() + ad);
        log_var.resize(ad);
        for (int d = 0; d < ad; ++d) log_var[d] = 2.0 * kLogStdBound.value(out[ad + d]);
        d_mean.assign(ad, 0.0);
        d_log_var.assign(ad, 0.0);
        gaussian_nll(mean, log_var, actions[i], d_mean, d_log_var);
        out_grad.assign(2 * ad, 0.0);
        for (int d = 0; d < ad; ++d) {
          out_grad[d] = scale * d_mean[d];
          out_grad[ad + d] =
              scale * d_log_var[d] * 2.0 * kLogStdBound.deriv(out[ad + d]);
        }
        net_.backward(tape, out_grad, grad);
      }
      adam_.apply(net_.params(), grad);
      ++gradient_steps_;
    }
  }
  ++fit_count_;

  double nll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto out = net_.forward(states[i]);
    mean.assign(out.begin(), out.begin() + ad);
    log_var.resize(ad);
    for (int d = 0; d < ad; ++d) log_var[d] = 2.0 * kLogStdBound.value(out[ad + d]);
    nll += gaussian_nll(mean, log_var, actions[i]);
  }
  return nll / static_cast<double>(n);
}

DiagGaussian ModelDataPolicy::conditional(std::span<const double> state) const {
  const auto out = net_.forward(state);
  std::vector<double> mean(out.begin(), out.begin() + action_dim_);
  std::vector<double> std_vec(action_dim_);
  for (int d = 0; d < action_dim_; ++d) {
    std_vec[d] = std::exp(kLogStdBound.value(out[action_dim_ + d]));
  }
  return DiagGaussian(std::move(mean), std::move(std_vec));
}

double ModelDataPolicy::priority_of(std::span<const double> state,
                                    std::span<const double> action) const {
  return priority(conditional(state), action, kPriorityEps);
}

void ModelDataPolicy::save(std::ostream& os) const {
  net_.save(os);
  adam_.save(os);
  io::write_i64(os, fit_count_);
  io::write_i64(os, gradient_steps_);
}

void ModelDataPolicy::load(std::istream& is) {
  net_ = Net::load(is);
  adam_.load(is, net_.param_count());
  fit_count_ = io::read_i64(is, "model policy fit count");
  gradient_steps_ = io::read_i64(is, "model policy gradient steps");
}

}  // namespace memr
