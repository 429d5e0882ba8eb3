#include "memr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "memr/binary_io.hpp"

namespace memr {

namespace {
constexpr double kNormStdFloor = 1e-6;
const SoftBound kLogVarBound{-10.0, 2.0};
}  // namespace

void Normalizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("Normalizer::fit: no rows");
  const std::size_t dim = rows.front().size();
  mean.assign(dim, 0.0);
  std.assign(dim, 0.0);
  for (const auto& r : rows) {
    if (r.size() != dim) throw std::invalid_argument("Normalizer::fit: ragged rows");
    for (std::size_t d = 0; d < dim; ++d) mean[d] += r[d];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = r[d] - mean[d];
      std[d] += diff * diff;
    }
  }
  for (auto& s : std) s = std::max(std::sqrt(s / n), kNormStdFloor);
}

void Normalizer::normalize_into(std::span<const double> x, std::span<double> out) const {
  if (x.size() != mean.size() || out.size() != mean.size()) {
    throw std::invalid_argument("Normalizer: dimension mismatch");
  }
  for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - mean[d]) / std[d];
}

std::vector<double> Normalizer::normalize(std::span<const double> x) const {
  std::vector<double> out(x.size());
  normalize_into(x, out);
  return out;
}

std::vector<double> Normalizer::denormalize(std::span<const double> z) const {
  if (z.size() != mean.size()) throw std::invalid_argument("Normalizer: dimension mismatch");
  std::vector<double> out(z.size());
  for (std::size_t d = 0; d < z.size(); ++d) out[d] = z[d] * std[d] + mean[d];
  return out;
}

void Normalizer::save(std::ostream& os) const {
  io::write_f64_vec(os, mean);
  io::write_f64_vec(os, std);
}

void Normalizer::load(std::istream& is) {
  mean = io::read_f64_vec(is, "normalizer mean");
  std = io::read_f64_vec(is, "normalizer std");
  if (mean.size() != std.size()) throw std::runtime_error("Normalizer::load: size mismatch");
}

double validation_error(const TrainReport& report) {
  if (report.holdout_mse.empty()) return 0.0;
  return std::accumulate(report.holdout_mse.begin(), report.holdout_mse.end(), 0.0) /
         static_cast<double>(report.holdout_mse.size());
}

EnsembleDynamics::EnsembleDynamics(int state_dim, int action_dim,
                                   const DynamicsConfig& cfg, Rng& init_rng)
    : state_dim_(state_dim), action_dim_(action_dim), cfg_(cfg) {
  if (state_dim < 1 || action_dim < 1) {
    throw std::invalid_argument("EnsembleDynamics: dimensions must be positive");
  }
  if (cfg.ensemble_size < 1) {
    throw std::invalid_argument("EnsembleDynamics: ensemble size must be >= 1");
  }
  std::vector<int> sizes;
  sizes.push_back(state_dim + action_dim);
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(2 * target_dim());
  for (int e = 0; e < cfg.ensemble_size; ++e) {
    Net net = Net::mlp(sizes, Activation::kRelu, Activation::kIdentity, init_rng);
    // Log-variance head starts at -1 so early predictive stds are moderate.
    const std::size_t last = net.layers().size() - 1;
    auto params = net.params();
    for (int d = 0; d < target_dim(); ++d) {
      params[net.bias_offset(last) + target_dim() + d] = -1.0;
    }
    adams_.emplace_back(net.param_count(), cfg.lr);
    nets_.push_back(std::move(net));
  }
  in_norm_.mean.assign(state_dim + action_dim, 0.0);
  in_norm_.std.assign(state_dim + action_dim, 1.0);
  out_norm_.mean.assign(target_dim(), 0.0);
  out_norm_.std.assign(target_dim(), 1.0);
}

double EnsembleDynamics::holdout_stats(std::size_t member,
                                       const std::vector<std::vector<double>>& x,
                                       const std::vector<std::vector<double>>& y,
                                       std::span<const std::size_t> holdout,
                                       double* mse_out) const {
  const int td = target_dim();
  double nll = 0.0, mse = 0.0;
  for (std::size_t i : holdout) {
    const auto out = nets_[member].forward(x[i]);
    std::vector<double> mean(out.begin(), out.begin() + td);
    std::vector<double> log_var(td);
    for (int d = 0; d < td; ++d) log_var[d] = kLogVarBound.value(out[td + d]);
    nll += gaussian_nll(mean, log_var, y[i]);
    const auto denorm = out_norm_.denormalize(mean);
    const auto truth = out_norm_.denormalize(y[i]);
    for (int d = 0; d < td; ++d) {
      const double r = denorm[d] - truth[d];
      mse += r * r;
    }
  }
  const double n = static_cast<double>(holdout.size());
  if (mse_out) *mse_out = mse / (n * td);
  return nll / n;
}

TrainReport EnsembleDynamics::train(const EnvReplayBuffer& env_buf, Rng& rng) {
  const std::size_t n = env_buf.size();
  if (n < cfg_.min_train_size) {
    throw std::invalid_argument("EnsembleDynamics::train: need at least " +
                                std::to_string(cfg_.min_train_size) + " transitions");
  }
  const int td = target_dim();
  const int in_dim = state_dim_ + action_dim_;

  // Raw rows, then refresh normalizers on the full dataset.
  std::vector<std::vector<double>> xin(n), yraw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = env_buf.at(i);
    auto& xi = xin[i];
    xi.reserve(in_dim);
    xi.insert(xi.end(), t.state.begin(), t.state.end());
    xi.insert(xi.end(), t.action.begin(), t.action.end());
    auto& yi = yraw[i];
    yi.reserve(td);
    for (int d = 0; d < state_dim_; ++d) yi.push_back(t.next_state[d] - t.state[d]);
    yi.push_back(t.reward);
  }
  in_norm_.fit(xin);
  out_norm_.fit(yraw);
  std::vector<std::vector<double>> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = in_norm_.normalize(xin[i]);
    y[i] = out_norm_.normalize(yraw[i]);
  }

  // Shared holdout split.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  }
  const std::size_t n_holdout =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg_.holdout_fraction *
                                                                  static_cast<double>(n))));
  const std::size_t n_train = n - n_holdout;
  std::vector<std::size_t> holdout(perm.begin() + n_train, perm.end());

  TrainReport report;
  report.initial_holdout_nll.resize(nets_.size());
  report.holdout_nll.resize(nets_.size());
  report.holdout_mse.resize(nets_.size());

  std::vector<double> grad, d_mean, d_log_var, out_grad;
  GradTape tape;
  for (std::size_t e = 0; e < nets_.size(); ++e) {
    if (cfg_.from_scratch) {
      nets_[e].init_uniform(rng);
      const std::size_t last = nets_[e].layers().size() - 1;
      auto params = nets_[e].params();
      for (int d = 0; d < td; ++d) params[nets_[e].bias_offset(last) + td + d] = -1.0;
      adams_[e] = AdamState(nets_[e].param_count(), cfg_.lr);
    }

    // Bootstrap resample of the training portion.
    std::vector<std::size_t> boot(n_train);
    for (auto& b : boot) b = perm[rng.uniform_index(n_train)];

    report.initial_holdout_nll[e] = holdout_stats(e, x, y, holdout, nullptr);
    double best_nll = report.initial_holdout_nll[e];
    int bad_epochs = 0;
    int epoch = 0;
    for (; epoch < cfg_.max_epochs; ++epoch) {
      for (std::size_t i = boot.size() - 1; i > 0; --i) {
        std::swap(boot[i], boot[rng.uniform_index(i + 1)]);
      }
      for (std::size_t start = 0; start < boot.size();
           start += static_cast<std::size_t>(cfg_.batch_size)) {
        const std::size_t stop =
            std::min(boot.size(), start + static_cast<std::size_t>(cfg_.batch_size));
        const double scale = 1.0 / static_cast<double>(stop - start);
        grad.assign(nets_[e].param_count(), 0.0);
        for (std::size_t bi = start; bi < stop; ++bi) {
          const std::size_t i = boot[bi];
          const auto out = nets_[e].forward(x[i], tape);
          std::vector<double> mean(out.begin(), out.begin() + td);
          std::vector<double> log_var(td);
          for (int d = 0; d < td; ++d) log_var[d] = kLogVarBound.value(out[td + d]);
          d_mean.assign(td, 0.0);
          d_log_var.assign(td, 0.0);
          gaussian_nll(mean, log_var, y[i], d_mean, d_log_var);
          out_grad.assign(2 * td, 0.0);
          for (int d = 0; d < td; ++d) {
            out_grad[d] = scale * d_mean[d];
            out_grad[td + d] = scale * d_log_var[d] * kLogVarBound.deriv(out[td + d]);
          }
          nets_[e].backward(tape, out_grad, grad);
        }
        adams_[e].apply(nets_[e].params(), grad);
      }
      const double nll = holdout_stats(e, x, y, holdout, nullptr);
      if (nll < best_nll - 1e-6) {
        best_nll = nll;
        bad_epochs = 0;
      } else if (++bad_epochs >= cfg_.patience) {
        ++epoch;
        break;
      }
    }
    report.epochs = std::max(report.epochs, epoch);
    report.holdout_nll[e] = holdout_stats(e, x, y, holdout, &report.holdout_mse[e]);
  }
  trained_ = true;
  return report;
}

void EnsembleDynamics::predict(int member, std::span<const double> state,
                               std::span<const double> action, std::vector<double>& mean,
                               std::vector<double>& log_var) const {
  if (member < 0 || member >= ensemble_size()) {
    throw std::invalid_argument("EnsembleDynamics::predict: member out of range");
  }
  std::vector<double> xin;
  xin.reserve(state.size() + action.size());
  xin.insert(xin.end(), state.begin(), state.end());
  xin.insert(xin.end(), action.begin(), action.end());
  const auto x = in_norm_.normalize(xin);
  const auto out = nets_[member].forward(x);
  const int td = target_dim();
  mean.assign(out.begin(), out.begin() + td);
  log_var.resize(td);
  for (int d = 0; d < td; ++d) log_var[d] = kLogVarBound.value(out[td + d]);
}

std::pair<std::vector<double>, double> EnsembleDynamics::rollout_one_step(
    std::span<const double> state, std::span<const double> action, Rng& rng) const {
  if (!trained_) {
    throw std::logic_error("EnsembleDynamics::rollout_one_step: model is untrained");
  }
  const int member = static_cast<int>(rng.uniform_index(nets_.size()));
  std::vector<double> mean, log_var;
  predict(member, state, action, mean, log_var);
  const int td = target_dim();
  std::vector<double> z(td);
  for (int d = 0; d < td; ++d) z[d] = mean[d] + std::exp(0.5 * log_var[d]) * rng.normal();
  const auto y = out_norm_.denormalize(z);
  std::vector<double> next(state.begin(), state.end());
  for (int d = 0; d < state_dim_; ++d) next[d] += y[d];
  return {std::move(next), y[state_dim_]};
}

void EnsembleDynamics::save(std::ostream& os) const {
  io::write_u32(os, static_cast<std::uint32_t>(nets_.size()));
  io::write_u32(os, trained_ ? 1 : 0);
  in_norm_.save(os);
  out_norm_.save(os);
  for (std::size_t e = 0; e < nets_.size(); ++e) {
    nets_[e].save(os);
    adams_[e].save(os);
  }
}

void EnsembleDynamics::load(std::istream& is) {
  const std::uint32_t count = io::read_u32(is, "ensemble size");
  if (count != nets_.size()) throw std::runtime_error("EnsembleDynamics::load: size mismatch");
  trained_ = io::read_u32(is, "ensemble trained flag") != 0;
  in_norm_.load(is);
  out_norm_.load(is);
  for (std::size_t e = 0; e < nets_.size(); ++e) {
    nets_[e] = Net::load(is);
    adams_[e].load(is, nets_[e].param_count());
  }
}

}  // namespace memr
