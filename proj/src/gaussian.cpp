#include "memr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace memr {

DiagGaussian::DiagGaussian(std::vector<double> mean_in, std::vector<double> std_in)
    : mean(std::move(mean_in)), std(std::move(std_in)) {
  if (mean.empty() || mean.size() != std.size()) {
    throw std::invalid_argument("DiagGaussian: mean/std must be nonempty and equal length");
  }
  for (double s : std) {
    if (!(s > 0.0)) throw std::invalid_argument("DiagGaussian: std must be strictly positive");
  }
}

double log_prob(const DiagGaussian& g, std::span<const double> x) {
  if (x.size() != g.mean.size()) {
    throw std::invalid_argument("log_prob: dimension mismatch");
  }
  double lp = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double z = (x[d] - g.mean[d]) / g.std[d];
    lp += -0.5 * kLog2Pi - std::log(g.std[d]) - 0.5 * z * z;
  }
  return lp;
}

double entropy(const DiagGaussian& g) {
  double h = 0.0;
  for (double s : g.std) h += 0.5 * (kLog2Pi + 1.0) + std::log(s);
  return h;
}

double priority(const DiagGaussian& g, std::span<const double> action, double eps) {
  if (action.size() != g.mean.size()) {
    throw std::invalid_argument("priority: dimension mismatch");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("priority: eps must be positive");
  double p = 0.0;
  for (std::size_t d = 0; d < action.size(); ++d) {
    const double z = (action[d] - g.mean[d]) / g.std[d];
    p += 0.5 * z * z;
  }
  return std::max(eps, p);
}

SampleSet1D::SampleSet1D(std::vector<double> v) : values(std::move(v)) {
  if (values.size() < 2) {
    throw std::invalid_argument("SampleSet1D: need at least two observations");
  }
}

double SampleSet1D::mle_mean() const {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double SampleSet1D::mle_var() const {
  const double mu = mle_mean();
  double ss = 0.0;
  for (double x : values) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(values.size());
}

double entropy_gain_exact(const SampleSet1D& s, double t) {
  const double var1 = s.mle_var();
  if (!(var1 > 0.0)) {
    throw std::domain_error("entropy_gain_exact: sample variance is zero");
  }
  const double n = static_cast<double>(s.count());
  const double sum = std::accumulate(s.values.begin(), s.values.end(), 0.0);
  const double mu2 = (sum + t) / (n + 1.0);
  double ss = 0.0;
  for (double x : s.values) ss += (x - mu2) * (x - mu2);
  ss += (t - mu2) * (t - mu2);
  const double var2 = ss / (n + 1.0);
  return 0.5 * std::log(var2 / var1);
}

double entropy_gain_approx(long n, double mean, double std, double t) {
  if (n < 1) throw std::invalid_argument("entropy_gain_approx: n must be >= 1");
  if (!(std > 0.0)) throw std::invalid_argument("entropy_gain_approx: std must be positive");
  const double z = t - mean;
  return z * z / (2.0 * static_cast<double>(n) * std * std);
}

std::size_t select_max_gain(std::span<const GainCandidate> candidates, double eps) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_max_gain: empty candidate list");
  }
  std::size_t best = 0;
  double best_p = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double p = priority(candidates[i].conditional, candidates[i].action, eps);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }
  return best;
}

double knn_entropy(const std::vector<std::vector<double>>& points, int k) {
  if (k < 1) throw std::invalid_argument("knn_entropy: k must be >= 1");
  const std::size_t n = points.size();
  if (n < static_cast<std::size_t>(k) + 1) {
    throw std::invalid_argument("knn_entropy: need at least k+1 points");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("knn_entropy: inconsistent dimensions");
  }

  constexpr double kDistFloor = 1e-12;
  double sum_log_rho = 0.0;
  std::vector<double> dist2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pi = points[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) {
        dist2[j] = std::numeric_limits<double>::infinity();
        continue;
      }
      const auto& pj = points[j];
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pi[d] - pj[d];
        d2 += diff * diff;
      }
      dist2[j] = d2;
    }
    std::nth_element(dist2.begin(), dist2.begin() + (k - 1), dist2.end());
    const double rho = std::max(std::sqrt(dist2[k - 1]), kDistFloor);
    sum_log_rho += std::log(rho);
  }

  const double nd = static_cast<double>(n);
  return static_cast<double>(dim) / nd * sum_log_rho +
         log_unit_ball_volume(static_cast<int>(dim)) + digamma(nd) -
         digamma(static_cast<double>(k));
}

}  // namespace memr
