#include "memr/sac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "memr/binary_io.hpp"

namespace memr {

namespace {

const SoftBound kLogStdBound{-20.0, 2.0};

// ln(1 - tanh(u)^2), evaluated without cancellation.
double log_one_minus_tanh2(double u) {
  return 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
}

}  // namespace

SacAgent::SacAgent(int state_dim, int action_dim, std::vector<double> action_limit,
                   const SacConfig& cfg, Rng& init_rng)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      action_limit_(std::move(action_limit)),
      cfg_(cfg) {
  if (state_dim < 1 || action_dim < 1) {
    throw std::invalid_argument("SacAgent: dimensions must be positive");
  }
  if (action_limit_.size() != static_cast<std::size_t>(action_dim)) {
    throw std::invalid_argument("SacAgent: action limit length mismatch");
  }
  for (double lim : action_limit_) {
    if (!(lim > 0.0)) throw std::invalid_argument("SacAgent: action limits must be positive");
  }
  target_entropy_ =
      cfg.target_entropy != 0.0 ? cfg.target_entropy : -static_cast<double>(action_dim);

  std::vector<int> psizes{state_dim};
  psizes.insert(psizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  psizes.push_back(2 * action_dim);
  policy_ = Net::mlp(psizes, Activation::kRelu, Activation::kIdentity, init_rng);

  std::vector<int> qsizes{state_dim + action_dim};
  qsizes.insert(qsizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  qsizes.push_back(1);
  q1_ = Net::mlp(qsizes, Activation::kRelu, Activation::kIdentity, init_rng);
  q2_ = Net::mlp(qsizes, Activation::kRelu, Activation::kIdentity, init_rng);
  q1_target_ = q1_;
  q2_target_ = q2_;

  policy_adam_ = AdamState(policy_.param_count(), cfg.lr);
  q1_adam_ = AdamState(q1_.param_count(), cfg.lr);
  q2_adam_ = AdamState(q2_.param_count(), cfg.lr);
  log_alpha_ = std::log(cfg.init_temperature);
  alpha_adam_ = AdamState(1, cfg.alpha_lr);
}

double SacAgent::temperature() const { return std::exp(log_alpha_); }

std::span<const double> SacAgent::q_params(int which) const {
  return which == 0 ? q1_.params() : q2_.params();
}

std::span<double> SacAgent::q_params_mut(int which) {
  return which == 0 ? q1_.params() : q2_.params();
}

std::span<const double> SacAgent::q_target_params(int which) const {
  return which == 0 ? q1_target_.params() : q2_target_.params();
}

SacAgent::PolicyEval SacAgent::eval_policy(std::span<const double> state,
                                           std::span<const double> xi,
                                           GradTape* tape) const {
  PolicyEval ev;
  const auto out = tape ? policy_.forward(state, *tape) : policy_.forward(state);
  const int ad = action_dim_;
  ev.mean.assign(out.begin(), out.begin() + ad);
  ev.raw_ls.assign(out.begin() + ad, out.end());
  ev.log_std.resize(ad);
  ev.std.resize(ad);
  ev.xi.assign(xi.begin(), xi.end());
  ev.u.resize(ad);
  ev.action.resize(ad);
  ev.log_pi = 0.0;
  for (int d = 0; d < ad; ++d) {
    ev.log_std[d] = kLogStdBound.value(ev.raw_ls[d]);
    ev.std[d] = std::exp(ev.log_std[d]);
    ev.u[d] = ev.mean[d] + ev.std[d] * ev.xi[d];
    ev.action[d] = std::tanh(ev.u[d]) * action_limit_[d];
    ev.log_pi += -0.5 * kLog2Pi - ev.log_std[d] - 0.5 * ev.xi[d] * ev.xi[d] -
                 std::log(action_limit_[d]) - log_one_minus_tanh2(ev.u[d]);
  }
  return ev;
}

std::vector<double> SacAgent::act(std::span<const double> state, bool deterministic,
                                  Rng& rng) const {
  const auto out = policy_.forward(state);
  std::vector<double> action(action_dim_);
  for (int d = 0; d < action_dim_; ++d) {
    double u = out[d];
    if (!deterministic) {
      const double std = std::exp(kLogStdBound.value(out[action_dim_ + d]));
      u += std * rng.normal();
    }
    action[d] = std::tanh(u) * action_limit_[d];
  }
  return action;
}

double SacAgent::critic_value(const Net& q, std::span<const double> state,
                              std::span<const double> action) const {
  std::vector<double> x;
  x.reserve(state.size() + action.size());
  x.insert(x.end(), state.begin(), state.end());
  x.insert(x.end(), action.begin(), action.end());
  return q.forward(x)[0];
}

double SacAgent::log_prob_action(std::span<const double> state,
                                 std::span<const double> action) const {
  const auto out = policy_.forward(state);
  double lp = 0.0;
  for (int d = 0; d < action_dim_; ++d) {
    const double mean = out[d];
    const double ls = kLogStdBound.value(out[action_dim_ + d]);
    const double std = std::exp(ls);
    const double a = action[d] / action_limit_[d];
    if (!(a > -1.0 && a < 1.0)) {
      throw std::invalid_argument("log_prob_action: action outside the open bounds");
    }
    const double u = std::atanh(a);
    const double z = (u - mean) / std;
    lp += -0.5 * kLog2Pi - ls - 0.5 * z * z - std::log(action_limit_[d]) -
          log_one_minus_tanh2(u);
  }
  return lp;
}

std::vector<double> SacAgent::td_targets(std::span<const ModelSample> batch,
                                         Rng& rng) const {
  const double alpha = temperature();
  std::vector<double> targets(batch.size());
  std::vector<double> xi(action_dim_);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    if (!(t.weight > 0.0) || t.weight > 1.0 + 1e-12) {
      throw std::invalid_argument("td_targets: weights must lie in (0, 1]");
    }
    for (auto& x : xi) x = rng.normal();
    const auto ev = eval_policy(t.next_state, xi, nullptr);
    const double q1t = critic_value(q1_target_, t.next_state, ev.action);
    const double q2t = critic_value(q2_target_, t.next_state, ev.action);
    const double y = t.reward + cfg_.gamma * (std::min(q1t, q2t) - alpha * ev.log_pi);
    if (!std::isfinite(y)) {
      throw std::runtime_error("td_targets: non-finite TD target (reward=" +
                               std::to_string(t.reward) + ")");
    }
    targets[i] = y;
  }
  return targets;
}

double SacAgent::critic_loss_and_grad(int which, std::span<const ModelSample> batch,
                                      std::span<const double> targets,
                                      std::span<double> grad_out) const {
  if (which != 0 && which != 1) {
    throw std::invalid_argument("critic_loss_and_grad: critic index must be 0 or 1");
  }
  if (batch.empty() || batch.size() != targets.size()) {
    throw std::invalid_argument("critic_loss_and_grad: batch/target length mismatch");
  }
  const Net& q = which == 0 ? q1_ : q2_;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  std::vector<double> x;
  GradTape tape;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    x.clear();
    x.insert(x.end(), t.state.begin(), t.state.end());
    x.insert(x.end(), t.action.begin(), t.action.end());
    double qv;
    if (grad_out.empty()) {
      qv = q.forward(x)[0];
    } else {
      qv = q.forward(x, tape)[0];
    }
    const double diff = qv - targets[i];
    loss += inv_n * t.weight * diff * diff;
    if (!grad_out.empty()) {
      const double dq[1] = {inv_n * t.weight * 2.0 * diff};
      q.backward(tape, dq, grad_out);
    }
  }
  return loss;
}

double SacAgent::q_update(std::span<const ModelSample> batch, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("q_update: empty batch");
  const auto targets = td_targets(batch, rng);
  double loss_sum = 0.0;
  std::vector<double> grad;
  for (int which = 0; which < 2; ++which) {
    Net& q = which == 0 ? q1_ : q2_;
    AdamState& adam = which == 0 ? q1_adam_ : q2_adam_;
    grad.assign(q.param_count(), 0.0);
    loss_sum += critic_loss_and_grad(which, batch, targets, grad);
    adam.apply(q.params(), grad);
  }
  return 0.5 * loss_sum;
}

double SacAgent::actor_surrogate(std::span<const std::vector<double>> states,
                                 std::span<const double> xi_flat,
                                 std::span<double> grad_out) const {
  const std::size_t n = states.size();
  const int ad = action_dim_;
  if (n == 0) throw std::invalid_argument("actor_surrogate: empty batch");
  if (xi_flat.size() != n * static_cast<std::size_t>(ad)) {
    throw std::invalid_argument("actor_surrogate: noise matrix size mismatch");
  }
  const double alpha = temperature();
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = 0.0;
  std::vector<double> x, out_grad(2 * ad);
  std::vector<double> q_scratch_grad, q_in_grad;
  GradTape ptape;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = states[i];
    const auto xi = xi_flat.subspan(i * ad, ad);
    const auto ev = eval_policy(s, xi, grad_out.empty() ? nullptr : &ptape);

    x.clear();
    x.insert(x.end(), s.begin(), s.end());
    x.insert(x.end(), ev.action.begin(), ev.action.end());
    GradTape t1, t2;
    const double qv1 = q1_.forward(x, t1)[0];
    const double qv2 = q2_.forward(x, t2)[0];
    const Net& qmin = qv1 <= qv2 ? q1_ : q2_;
    GradTape& qmin_tape = qv1 <= qv2 ? t1 : t2;
    const double qmin_v = std::min(qv1, qv2);

    loss += inv_n * (alpha * ev.log_pi - qmin_v);
    if (grad_out.empty()) continue;

    // d(loss)/d(action) through the chosen critic; its own parameter grads
    // are discarded.
    q_scratch_grad.assign(qmin.param_count(), 0.0);
    q_in_grad.assign(static_cast<std::size_t>(state_dim_ + ad), 0.0);
    const double qout_grad[1] = {-inv_n};
    qmin.backward(qmin_tape, qout_grad, q_scratch_grad, q_in_grad);

    for (int d = 0; d < ad; ++d) {
      const double da = q_in_grad[state_dim_ + d];
      const double tanh_u = ev.action[d] / action_limit_[d];
      // The Gaussian u-density term of d log_pi / du cancels under
      // reparameterization; only the squash correction survives.
      const double dlogpi_du = 2.0 - 4.0 * sigmoid(-2.0 * ev.u[d]);
      const double du =
          da * action_limit_[d] * (1.0 - tanh_u * tanh_u) + inv_n * alpha * dlogpi_du;
      const double dls = -inv_n * alpha + du * ev.xi[d] * ev.std[d];
      out_grad[d] = du;
      out_grad[ad + d] = dls * kLogStdBound.deriv(ev.raw_ls[d]);
    }
    policy_.backward(ptape, out_grad, grad_out);
  }
  return loss;
}

double SacAgent::policy_update(std::span<const std::vector<double>> states, Rng& rng) {
  if (states.empty()) throw std::invalid_argument("policy_update: empty batch");
  std::vector<double> xi_flat(states.size() * static_cast<std::size_t>(action_dim_));
  for (auto& v : xi_flat) v = rng.normal();
  std::vector<double> grad(policy_.param_count(), 0.0);
  const double loss = actor_surrogate(states, xi_flat, grad);
  policy_adam_.apply(policy_.params(), grad);
  return loss;
}

double SacAgent::temperature_update(std::span<const std::vector<double>> states,
                                    Rng& rng) {
  if (states.empty()) throw std::invalid_argument("temperature_update: empty batch");
  std::vector<double> xi(action_dim_);
  double mean_term = 0.0;
  for (const auto& s : states) {
    for (auto& v : xi) v = rng.normal();
    const auto ev = eval_policy(s, xi, nullptr);
    mean_term += ev.log_pi + target_entropy_;
  }
  mean_term /= static_cast<double>(states.size());
  // loss(log alpha) = -log_alpha * E[log pi + target]; descend it.
  const double grad[1] = {-mean_term};
  double params[1] = {log_alpha_};
  alpha_adam_.apply(params, grad);
  log_alpha_ = params[0];
  return temperature();
}

void SacAgent::target_sync(double tau) {
  if (!(tau > 0.0) || tau > 1.0) {
    throw std::invalid_argument("target_sync: tau must be in (0, 1]");
  }
  auto blend = [tau](Net& target, const Net& online) {
    auto t = target.params();
    auto o = online.params();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * o[i];
  };
  blend(q1_target_, q1_);
  blend(q2_target_, q2_);
}

void SacAgent::save(std::ostream& os) const {
  policy_.save(os);
  q1_.save(os);
  q2_.save(os);
  q1_target_.save(os);
  q2_target_.save(os);
  policy_adam_.save(os);
  q1_adam_.save(os);
  q2_adam_.save(os);
  io::write_f64(os, log_alpha_);
  alpha_adam_.save(os);
}

void SacAgent::load(std::istream& is) {
  policy_ = Net::load(is);
  q1_ = Net::load(is);
  q2_ = Net::load(is);
  q1_target_ = Net::load(is);
  q2_target_ = Net::load(is);
  policy_adam_.load(is, policy_.param_count());
  q1_adam_.load(is, q1_.param_count());
  q2_adam_.load(is, q2_.param_count());
  log_alpha_ = io::read_f64(is, "sac log alpha");
  alpha_adam_.load(is, 1);
}

}  // namespace memr
