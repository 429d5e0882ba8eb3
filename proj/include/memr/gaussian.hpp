#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "memr/math_util.hpp"

namespace memr {

// Floor applied to sampling priorities so every stored state keeps a nonzero
// sampling probability.
inline constexpr double kPriorityEps = 1e-6;

// Floor applied to fitted conditional standard deviations.
inline constexpr double kStdFloor = 1e-3;

// Diagonal-covariance Gaussian over a continuous vector space.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> std;

  DiagGaussian(std::vector<double> mean_in, std::vector<double> std_in);
  int dim() const { return static_cast<int>(mean.size()); }
};

double log_prob(const DiagGaussian& g, std::span<const double> x);

// Differential entropy, sum of 0.5*ln(2*pi*e*std_d^2) over dimensions.
double entropy(const DiagGaussian& g);

// Sampling priority of an action under a fitted conditional: the half squared
// Mahalanobis deviation, floored at eps. Per dimension this equals
// -log(sqrt(2*pi) * pdf(a) * std) exactly; dimensions add because the
// diagonal-Gaussian joint entropy is dimension-additive.
double priority(const DiagGaussian& g, std::span<const double> action,
                double eps = kPriorityEps);

// Scalar observation set with maximum-likelihood moments.
struct SampleSet1D {
  std::vector<double> values;

  explicit SampleSet1D(std::vector<double> v);
  std::size_t count() const { return values.size(); }
  double mle_mean() const;
  double mle_var() const;
};

// Entropy change of the fitted Gaussian when observation t is appended,
// computed by literally refitting the MLE mean and variance on values+{t}.
// Equals 0.5*ln((N/(N+1)) * (1 + (t-mean)^2 / ((N+1)*var))).
double entropy_gain_exact(const SampleSet1D& s, double t);

// Large-N surrogate for the same quantity: (t-mean)^2 / (2*n*std^2).
double entropy_gain_approx(long n, double mean, double std, double t);

// One candidate (state, proposed action, fitted conditional at that state).
struct GainCandidate {
  std::size_t state_id = 0;
  std::vector<double> action;
  DiagGaussian conditional;
};

// Index of the candidate whose insertion raises the dataset entropy the most,
// i.e. the one with maximum priority. Ties break toward the lowest index.
std::size_t select_max_gain(std::span<const GainCandidate> candidates,
                            double eps = kPriorityEps);

// Kozachenko-Leonenko k-nearest-neighbor estimate of differential entropy.
// Distances are floored at 1e-12 so duplicate points stay finite.
double knn_entropy(const std::vector<std::vector<double>>& points, int k);

}  // namespace memr
