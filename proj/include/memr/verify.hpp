#pragma once

#include <string>
#include <vector>

#include "memr/math_util.hpp"

namespace memr::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Max |exact - approx| entropy gain over `trials` random sample sets of size
// n, with the probe point within 3 fitted stds; must stay within 1/n.
CheckResult lemma_bound(long n, int trials, Rng& rng);

// Synthetic 20-state datasets with >= 200 Gaussian actions per state: the
// priority argmax must match the exact joint-entropy-gain argmax (full MLE
// refit oracle over H(S) + E[H(A|S)]) in >= 95% of trials with mean Spearman
// rank correlation >= 0.9.
CheckResult theorem_ranking(int trials, Rng& rng);

// |priority - literal -log(sqrt(2pi) pdf sigma) evaluation| <= 1e-9.
CheckResult priority_closed_form(int draws, Rng& rng);

// Empirical sampling frequencies against p^alpha / sum within L1 <= 0.01.
CheckResult sampling_frequencies(std::size_t size, std::size_t draws, double alpha,
                                 Rng& rng);

// Tree descent against a linear cumulative-sum scan on random prefixes.
CheckResult prefix_descent_equivalence(std::size_t leaves, int trials, Rng& rng);

// Central finite differences against analytic gradients for the Gaussian NLL
// head, the weighted critic loss, and the actor surrogate.
CheckResult gradient_check_nll(int configs, Rng& rng);
CheckResult gradient_check_critic(int configs, Rng& rng);
CheckResult gradient_check_actor(int configs, Rng& rng);

// The default suite run by the verify command.
std::vector<CheckResult> run_default_suite(std::uint64_t seed);

}  // namespace memr::verify
