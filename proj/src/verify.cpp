#include "memr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "memr/gaussian.hpp"
#include "memr/net.hpp"
#include "memr/replay.hpp"
#include "memr/sac.hpp"

namespace memr::verify {

namespace {

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

// Ranks for Spearman; ties are broken by value order (continuous scores).
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  return cov / std::sqrt(va * vb);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

// Max relative error between an analytic gradient and central differences of
// loss_fn over the given parameter view.
template <typename LossFn>
double fd_max_rel_err(std::span<double> params, std::span<const double> analytic,
                      LossFn&& loss_fn, double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss_fn();
    params[i] = keep - h;
    const double down = loss_fn();
    params[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, rel_err(analytic[i], fd));
  }
  return worst;
}

}  // namespace

CheckResult lemma_bound(long n, int trials, Rng& rng) {
  double max_diff = 0.0;
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int trial = 0; trial < trials; ++trial) {
    const double mu = rng.uniform(-5.0, 5.0);
    const double sigma = rng.uniform(0.5, 3.0);
    for (auto& v : values) v = rng.normal(mu, sigma);
    SampleSet1D set(values);
    const double m1 = set.mle_mean();
    const double s1 = std::sqrt(set.mle_var());
    const double t = m1 + rng.uniform(-3.0, 3.0) * s1;
    const double exact = entropy_gain_exact(set, t);
    const double approx = entropy_gain_approx(n, m1, s1, t);
    max_diff = std::max(max_diff, std::abs(exact - approx));
  }
  const double bound = 1.0 / static_cast<double>(n);
  CheckResult res;
  res.name = "lemma_bound_n" + std::to_string(n);
  res.pass = max_diff <= bound;
  res.detail = format("max |exact-approx| = %.3e (bound %.3e)", max_diff, bound);
  return res;
}

CheckResult theorem_ranking(int trials, Rng& rng) {
  constexpr int kStates = 20;
  int top1_matches = 0;
  double spearman_sum = 0.0;

  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::vector<double>> samples(kStates);
    std::vector<double> fitted_mean(kStates), fitted_std(kStates);
    std::vector<long> counts(kStates);
    long total = 0;
    for (int i = 0; i < kStates; ++i) {
      counts[i] = 200 + static_cast<long>(rng.uniform_index(201));
      total += counts[i];
      const double mu = rng.normal(0.0, 2.0);
      const double sigma = rng.uniform(0.5, 2.0);
      samples[i].resize(static_cast<std::size_t>(counts[i]));
      for (auto& v : samples[i]) v = rng.normal(mu, sigma);
      SampleSet1D set(samples[i]);
      fitted_mean[i] = set.mle_mean();
      fitted_std[i] = std::max(std::sqrt(set.mle_var()), kStdFloor);
    }

    std::vector<GainCandidate> candidates;
    std::vector<double> actions(kStates);
    for (int i = 0; i < kStates; ++i) {
      actions[i] = rng.normal(fitted_mean[i], 1.5 * fitted_std[i]);
      candidates.push_back(GainCandidate{
          static_cast<std::size_t>(i),
          {actions[i]},
          DiagGaussian({fitted_mean[i]}, {fitted_std[i]})});
    }
    const std::size_t chosen = select_max_gain(candidates);

    // Exact joint entropy gain by full refit: H(S) + E[H(A|S)] before and
    // after adding (s_k, a_k).
    const double n_total = static_cast<double>(total);
    std::vector<double> h1(kStates);
    double hs_before = 0.0, ha_before = 0.0;
    for (int i = 0; i < kStates; ++i) {
      const double p = static_cast<double>(counts[i]) / n_total;
      hs_before -= p * std::log(p);
      h1[i] = 0.5 * (kLog2Pi + 1.0) + std::log(fitted_std[i]);
      ha_before += p * h1[i];
    }

    std::vector<double> gains(kStates);
    std::vector<double> priorities(kStates);
    for (int k = 0; k < kStates; ++k) {
      const double np = n_total + 1.0;
      double hs_after = 0.0, ha_after = 0.0;
      for (int i = 0; i < kStates; ++i) {
        const double ci = static_cast<double>(counts[i]) + (i == k ? 1.0 : 0.0);
        const double p = ci / np;
        hs_after -= p * std::log(p);
        double h = h1[i];
        if (i == k) {
          SampleSet1D set(samples[i]);
          h = h1[i] + entropy_gain_exact(set, actions[i]);
        }
        ha_after += p * h;
      }
      gains[k] = (hs_after + ha_after) - (hs_before + ha_before);
      priorities[k] = priority(candidates[k].conditional, candidates[k].action);
    }
    const std::size_t oracle =
        static_cast<std::size_t>(std::max_element(gains.begin(), gains.end()) -
                                 gains.begin());
    if (oracle == chosen) ++top1_matches;
    spearman_sum += spearman(gains, priorities);
  }

  const double match_rate = static_cast<double>(top1_matches) / trials;
  const double mean_spearman = spearman_sum / trials;
  CheckResult res;
  res.name = "theorem_ranking";
  res.pass = match_rate >= 0.95 && mean_spearman >= 0.9;
  res.detail = format("top-1 agreement %.3f (need >= 0.95), mean spearman %.3f (need >= 0.9)",
                      match_rate, mean_spearman);
  return res;
}

CheckResult priority_closed_form(int draws, Rng& rng) {
  double max_diff = 0.0;
  for (int i = 0; i < draws; ++i) {
    const int dim = 1 + static_cast<int>(rng.uniform_index(6));
    std::vector<double> mean(dim), std_vec(dim), action(dim);
    for (int d = 0; d < dim; ++d) {
      mean[d] = rng.normal(0.0, 3.0);
      std_vec[d] = rng.uniform(0.1, 10.0);
      action[d] = mean[d] + rng.uniform(-6.0, 6.0) * std_vec[d];
    }
    const DiagGaussian g(mean, std_vec);
    // Literal per-dimension evaluation of -log(sqrt(2pi) * pdf * sigma).
    double literal = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double z = (action[d] - mean[d]) / std_vec[d];
      const double pdf =
          std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * std_vec[d]);
      literal += -std::log(std::sqrt(2.0 * kPi) * pdf * std_vec[d]);
    }
    const double lit_clamped = std::max(kPriorityEps, literal);
    max_diff = std::max(max_diff, std::abs(priority(g, action) - lit_clamped));
  }
  CheckResult res;
  res.name = "priority_closed_form";
  res.pass = max_diff <= 1e-9;
  res.detail = format("max |priority - literal| = %.3e (bound 1e-9)", max_diff);
  return res;
}

CheckResult sampling_frequencies(std::size_t size, std::size_t draws, double alpha,
                                 Rng& rng) {
  EnvReplayBuffer buf(size, alpha);
  std::vector<double> priorities(size);
  for (auto& p : priorities) p = rng.uniform(0.1, 10.0);
  for (std::size_t i = 0; i < size; ++i) {
    EnvTransition t;
    t.state = {static_cast<double>(i)};
    t.action = {0.0};
    t.next_state = {0.0};
    t.priority = priorities[i];
    buf.add(std::move(t));
  }
  double mass = 0.0;
  for (double p : priorities) mass += std::pow(p, alpha);

  std::vector<std::size_t> counts(size, 0);
  const std::size_t chunk = 10000;
  for (std::size_t done = 0; done < draws; done += chunk) {
    const auto batch = buf.sample_states(std::min(chunk, draws - done), 0.0, rng);
    for (const auto& s : batch) ++counts[s.index];
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double target = std::pow(priorities[i], alpha) / mass;
    const double freq = static_cast<double>(counts[i]) / static_cast<double>(draws);
    l1 += std::abs(freq - target);
  }
  CheckResult res;
  res.name = "sampling_frequencies_n" + std::to_string(size) + "_a" + format("%.1f", alpha);
  res.pass = l1 <= 0.01;
  res.detail = format("L1 distance %.5f (bound 0.01)", l1);
  return res;
}

CheckResult prefix_descent_equivalence(std::size_t leaves, int trials, Rng& rng) {
  SumTree tree(leaves);
  std::vector<double> mass(tree.leaf_count(), 0.0);
  for (std::size_t i = 0; i < leaves; ++i) {
    mass[i] = rng.uniform(0.0, 5.0);
    tree.set(i, mass[i]);
  }
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    const double u = rng.uniform(0.0, tree.total());
    const std::size_t by_tree = tree.find_prefix(u);
    std::size_t by_scan = tree.leaf_count() - 1;
    double cum = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      cum += mass[i];
      if (u < cum) {
        by_scan = i;
        break;
      }
    }
    if (by_tree != by_scan) ++mismatches;
  }
  CheckResult res;
  res.name = "prefix_descent_equivalence";
  res.pass = mismatches == 0;
  res.detail = format("%.0f mismatches over %.0f prefixes",
                      static_cast<double>(mismatches), static_cast<double>(trials));
  return res;
}

CheckResult gradient_check_nll(int configs, Rng& rng) {
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    const int d = 1 + static_cast<int>(rng.uniform_index(3));
    Net net = Net::mlp({3, 8, 2 * d}, Activation::kTanh, Activation::kIdentity, rng);
    std::vector<double> input(3), target(d);
    for (auto& v : input) v = rng.normal();
    for (auto& v : target) v = rng.normal();

    auto loss_fn = [&]() {
      const auto out = net.forward(input);
      return gaussian_nll(std::span(out).first(d), std::span(out).subspan(d), target);
    };

    GradTape tape;
    const auto out = net.forward(input, tape);
    std::vector<double> d_mean(d, 0.0), d_log_var(d, 0.0);
    gaussian_nll(std::span(out).first(d), std::span(out).subspan(d), target, d_mean,
                 d_log_var);
    std::vector<double> out_grad(2 * d);
    for (int i = 0; i < d; ++i) {
      out_grad[i] = d_mean[i];
      out_grad[d + i] = d_log_var[i];
    }
    std::vector<double> grad(net.param_count(), 0.0);
    net.backward(tape, out_grad, grad);

    worst = std::max(worst, fd_max_rel_err(net.params(), grad, loss_fn));
  }
  CheckResult res;
  res.name = "gradient_check_nll";
  res.pass = worst <= 1e-4;
  res.detail = format("max relative error %.3e (bound 1e-4)", worst);
  return res;
}

namespace {

SacAgent make_toy_agent(Rng& rng) {
  SacConfig cfg;
  cfg.hidden = {8, 8};
  return SacAgent(2, 1, {1.5}, cfg, rng);
}

std::vector<ModelSample> toy_batch(int n, Rng& rng) {
  std::vector<ModelSample> batch(n);
  for (auto& t : batch) {
    t.state = {rng.normal(), rng.normal()};
    t.action = {rng.uniform(-1.4, 1.4)};
    t.next_state = {rng.normal(), rng.normal()};
    t.reward = rng.normal();
    t.weight = rng.uniform(0.2, 1.0);
  }
  return batch;
}

}  // namespace

CheckResult gradient_check_critic(int configs, Rng& rng) {
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    SacAgent agent = make_toy_agent(rng);
    const auto batch = toy_batch(6, rng);
    const auto targets = agent.td_targets(batch, rng);
    for (int which = 0; which < 2; ++which) {
      std::vector<double> grad(agent.q_params(which).size(), 0.0);
      agent.critic_loss_and_grad(which, batch, targets, grad);
      auto loss_fn = [&]() {
        return agent.critic_loss_and_grad(which, batch, targets, {});
      };
      worst = std::max(worst, fd_max_rel_err(agent.q_params_mut(which), grad, loss_fn));
    }
  }
  CheckResult res;
  res.name = "gradient_check_critic";
  res.pass = worst <= 1e-4;
  res.detail = format("max relative error %.3e (bound 1e-4)", worst);
  return res;
}

CheckResult gradient_check_actor(int configs, Rng& rng) {
  double worst = 0.0;
  for (int c = 0; c < configs; ++c) {
    SacAgent agent = make_toy_agent(rng);
    const int n = 6;
    std::vector<std::vector<double>> states(n);
    for (auto& s : states) s = {rng.normal(), rng.normal()};
    std::vector<double> xi(static_cast<std::size_t>(n) * 1);
    for (auto& v : xi) v = rng.normal();

    std::vector<double> grad(agent.policy_params().size(), 0.0);
    agent.actor_surrogate(states, xi, grad);
    auto loss_fn = [&]() { return agent.actor_surrogate(states, xi, {}); };
    worst = std::max(worst, fd_max_rel_err(agent.policy_params_mut(), grad, loss_fn));
  }
  CheckResult res;
  res.name = "gradient_check_actor";
  res.pass = worst <= 1e-4;
  res.detail = format("max relative error %.3e (bound 1e-4)", worst);
  return res;
}

std::vector<CheckResult> run_default_suite(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CheckResult> results;
  for (long n : {100L, 1000L, 10000L}) results.push_back(lemma_bound(n, 1000, rng));
  results.push_back(theorem_ranking(100, rng));
  results.push_back(priority_closed_form(10000, rng));
  results.push_back(sampling_frequencies(16, 1000000, 1.0, rng));
  results.push_back(sampling_frequencies(1024, 1000000, 0.6, rng));
  results.push_back(prefix_descent_equivalence(1000, 10000, rng));
  results.push_back(gradient_check_nll(100, rng));
  results.push_back(gradient_check_critic(100, rng));
  results.push_back(gradient_check_actor(100, rng));
  return results;
}

}  // namespace memr::verify
