#include "memr/net.hpp"

#include <cmath>
#include <stdexcept>

#include "memr/binary_io.hpp"

namespace memr {

namespace {

double activate(Activation act, double z) {
  switch (act) {
    case Activation::kIdentity: return z;
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
  }
  return z;
}

// Derivative in terms of pre-activation z and cached post-activation a.
double activate_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: return 1.0 - a * a;
  }
  return 1.0;
}

}  // namespace

Net::Net(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  std::size_t count = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    if (spec.in <= 0 || spec.out <= 0) {
      throw std::invalid_argument("Net: layer dimensions must be positive");
    }
    if (l > 0 && spec.in != layers_[l - 1].out) {
      throw std::invalid_argument("Net: consecutive layer dimensions do not chain");
    }
    w_off_.push_back(count);
    count += static_cast<std::size_t>(spec.in) * spec.out;
    b_off_.push_back(count);
    count += static_cast<std::size_t>(spec.out);
  }
  params_.assign(count, 0.0);
}

Net Net::mlp(const std::vector<int>& sizes, Activation hidden, Activation output,
             Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("Net::mlp: need at least two sizes");
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = (i + 2 == sizes.size());
    layers.push_back({sizes[i], sizes[i + 1], last ? output : hidden});
  }
  Net net(std::move(layers));
  net.init_uniform(rng);
  return net;
}

void Net::init_uniform(Rng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in));
    double* w = params_.data() + w_off_[l];
    for (int i = 0; i < spec.in * spec.out; ++i) w[i] = rng.uniform(-bound, bound);
    double* b = params_.data() + b_off_[l];
    for (int i = 0; i < spec.out; ++i) b[i] = rng.uniform(-bound, bound);
  }
}

std::vector<double> Net::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    throw std::invalid_argument("Net::forward: input dimension mismatch");
  }
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    next.assign(static_cast<std::size_t>(spec.out), 0.0);
    for (int r = 0; r < spec.out; ++r) {
      const double* wr = w + static_cast<std::size_t>(r) * spec.in;
      double z = b[r];
      for (int c = 0; c < spec.in; ++c) z += wr[c] * cur[c];
      next[r] = activate(spec.act, z);
    }
    cur.swap(next);
  }
  for (double v : cur) {
    if (!std::isfinite(v)) throw std::runtime_error("Net::forward: non-finite output");
  }
  return cur;
}

std::vector<double> Net::forward(std::span<const double> x, GradTape& tape) const {
  if (static_cast<int>(x.size()) != input_dim()) {
    throw std::invalid_argument("Net::forward: input dimension mismatch");
  }
  tape.input.assign(x.begin(), x.end());
  tape.pre.resize(layers_.size());
  tape.post.resize(layers_.size());
  tape.consumed = false;

  const std::vector<double>* cur = &tape.input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    auto& z = tape.pre[l];
    auto& a = tape.post[l];
    z.assign(static_cast<std::size_t>(spec.out), 0.0);
    a.assign(static_cast<std::size_t>(spec.out), 0.0);
    for (int r = 0; r < spec.out; ++r) {
      const double* wr = w + static_cast<std::size_t>(r) * spec.in;
      double zr = b[r];
      for (int c = 0; c < spec.in; ++c) zr += wr[c] * (*cur)[c];
      z[r] = zr;
      a[r] = activate(spec.act, zr);
    }
    cur = &a;
  }
  for (double v : *cur) {
    if (!std::isfinite(v)) throw std::runtime_error("Net::forward: non-finite output");
  }
  return *cur;
}

void Net::backward(GradTape& tape, std::span<const double> out_grad,
                   std::span<double> param_grad, std::span<double> input_grad) const {
  if (tape.consumed) throw std::invalid_argument("Net::backward: tape already consumed");
  if (tape.post.size() != layers_.size()) {
    throw std::invalid_argument("Net::backward: tape does not match this net");
  }
  if (static_cast<int>(out_grad.size()) != output_dim()) {
    throw std::invalid_argument("Net::backward: output gradient dimension mismatch");
  }
  if (param_grad.size() != params_.size()) {
    throw std::invalid_argument("Net::backward: parameter gradient size mismatch");
  }
  tape.consumed = true;

  std::vector<double> delta(out_grad.begin(), out_grad.end());
  std::vector<double> delta_prev;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& spec = layers_[li];
    const auto& z = tape.pre[li];
    const auto& a = tape.post[li];
    const std::vector<double>& below = (li == 0) ? tape.input : tape.post[li - 1];

    for (int r = 0; r < spec.out; ++r) delta[r] *= activate_grad(spec.act, z[r], a[r]);

    double* dw = param_grad.data() + w_off_[li];
    double* db = param_grad.data() + b_off_[li];
    for (int r = 0; r < spec.out; ++r) {
      double* dwr = dw + static_cast<std::size_t>(r) * spec.in;
      const double dr = delta[r];
      for (int c = 0; c < spec.in; ++c) dwr[c] += dr * below[c];
      db[r] += dr;
    }

    if (li > 0 || !input_grad.empty()) {
      delta_prev.assign(static_cast<std::size_t>(spec.in), 0.0);
      const double* w = params_.data() + w_off_[li];
      for (int r = 0; r < spec.out; ++r) {
        const double* wr = w + static_cast<std::size_t>(r) * spec.in;
        const double dr = delta[r];
        for (int c = 0; c < spec.in; ++c) delta_prev[c] += wr[c] * dr;
      }
      if (li == 0) {
        if (input_grad.size() != static_cast<std::size_t>(spec.in)) {
          throw std::invalid_argument("Net::backward: input gradient size mismatch");
        }
        for (int c = 0; c < spec.in; ++c) input_grad[c] += delta_prev[c];
      }
      delta.swap(delta_prev);
    }
  }
}

void Net::save(std::ostream& os) const {
  io::write_u32(os, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& spec : layers_) {
    io::write_u32(os, static_cast<std::uint32_t>(spec.in));
    io::write_u32(os, static_cast<std::uint32_t>(spec.out));
    io::write_u32(os, static_cast<std::uint32_t>(spec.act));
  }
  for (double p : params_) io::write_f64(os, p);
}

Net Net::load(std::istream& is) {
  const std::uint32_t n = io::read_u32(is, "net layer count");
  std::vector<LayerSpec> layers(n);
  for (auto& spec : layers) {
    spec.in = static_cast<int>(io::read_u32(is, "net layer in"));
    spec.out = static_cast<int>(io::read_u32(is, "net layer out"));
    const std::uint32_t act = io::read_u32(is, "net layer act");
    if (act > 2) throw std::runtime_error("Net::load: bad activation tag");
    spec.act = static_cast<Activation>(act);
  }
  Net net(std::move(layers));
  for (auto& p : net.params_) p = io::read_f64(is, "net params");
  return net;
}

double gaussian_nll(std::span<const double> mean, std::span<const double> log_var,
                    std::span<const double> target, std::span<double> d_mean,
                    std::span<double> d_log_var) {
  const std::size_t n = mean.size();
  if (log_var.size() != n || target.size() != n) {
    throw std::invalid_argument("gaussian_nll: length mismatch");
  }
  double loss = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    if (!std::isfinite(mean[d]) || !std::isfinite(log_var[d]) || !std::isfinite(target[d])) {
      throw std::runtime_error("gaussian_nll: non-finite input");
    }
    const double r = target[d] - mean[d];
    const double inv_var = std::exp(-log_var[d]);
    loss += 0.5 * (r * r * inv_var + log_var[d] + kLog2Pi);
    if (!d_mean.empty()) d_mean[d] += -r * inv_var;
    if (!d_log_var.empty()) d_log_var[d] += 0.5 * (1.0 - r * r * inv_var);
  }
  return loss;
}

AdamState::AdamState(std::size_t n, double learning_rate)
    : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

void AdamState::apply(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m.size() || grads.size() != m.size()) {
    throw std::invalid_argument("AdamState::apply: size mismatch");
  }
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void AdamState::save(std::ostream& os) const {
  io::write_f64(os, lr);
  io::write_f64(os, beta1);
  io::write_f64(os, beta2);
  io::write_f64(os, eps);
  io::write_i64(os, step);
  io::write_f64_vec(os, m);
  io::write_f64_vec(os, v);
}

void AdamState::load(std::istream& is, std::size_t expected_size) {
  lr = io::read_f64(is, "adam lr");
  beta1 = io::read_f64(is, "adam beta1");
  beta2 = io::read_f64(is, "adam beta2");
  eps = io::read_f64(is, "adam eps");
  step = io::read_i64(is, "adam step");
  m = io::read_f64_vec(is, "adam m");
  v = io::read_f64_vec(is, "adam v");
  if (m.size() != expected_size || v.size() != expected_size) {
    throw std::runtime_error("AdamState::load: moment size mismatch");
  }
}

}  // namespace memr
