#include <doctest.h>

#include <cmath>
#include <vector>

#include "memr/gaussian.hpp"

using namespace memr;

TEST_SUITE_BEGIN("gaussian");

TEST_CASE("log_prob closed forms") {
  const double half_log_2pi = 0.5 * kLog2Pi;
  CHECK(log_prob(DiagGaussian({0.0}, {1.0}), std::vector<double>{0.0}) ==
        doctest::Approx(-half_log_2pi).epsilon(1e-12));
  // translation invariance at the mean
  CHECK(log_prob(DiagGaussian({3.0}, {1.0}), std::vector<double>{3.0}) ==
        doctest::Approx(-half_log_2pi).epsilon(1e-12));
  const double expected = -2.0 * half_log_2pi - std::log(2.0) - 0.5 - 0.5;
  CHECK(log_prob(DiagGaussian({0.0, 0.0}, {1.0, 2.0}), std::vector<double>{1.0, 2.0}) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(log_prob(DiagGaussian({0.0}, {1.0}), std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("entropy closed forms and additivity") {
  const double h1 = 0.5 * std::log(2.0 * kPi * std::exp(1.0));
  CHECK(entropy(DiagGaussian({0.0}, {1.0})) == doctest::Approx(h1).epsilon(1e-12));
  CHECK(entropy(DiagGaussian({0.0, 0.0}, {1.0, 1.0})) ==
        doctest::Approx(2.0 * h1).epsilon(1e-12));
  // scale rule H(sigma X) = H(X) + ln sigma
  CHECK(entropy(DiagGaussian({0.0}, {2.0})) ==
        doctest::Approx(h1 + std::log(2.0)).epsilon(1e-12));

  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> mu{rng.normal(), rng.normal()};
    std::vector<double> sd{rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)};
    const DiagGaussian joint(mu, sd);
    const DiagGaussian a({mu[0]}, {sd[0]});
    const DiagGaussian b({mu[1]}, {sd[1]});
    CHECK(entropy(joint) == doctest::Approx(entropy(a) + entropy(b)).epsilon(1e-12));
  }
}

TEST_CASE("priority examples and clamping") {
  CHECK(priority(DiagGaussian({0.0}, {1.0}), std::vector<double>{0.0}, 1e-6) ==
        doctest::Approx(1e-6));
  CHECK(priority(DiagGaussian({0.0}, {1.0}), std::vector<double>{2.0}, 1e-6) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(priority(DiagGaussian({0.0, 0.0}, {1.0, 2.0}), std::vector<double>{1.0, 2.0},
                 1e-6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("priority equals -log_prob minus the entropy-like offset") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const int dim = 1 + static_cast<int>(rng.uniform_index(4));
    std::vector<double> mu(dim), sd(dim), a(dim);
    for (int d = 0; d < dim; ++d) {
      mu[d] = rng.normal(0.0, 2.0);
      sd[d] = rng.uniform(0.2, 4.0);
      a[d] = mu[d] + rng.uniform(-4.0, 4.0) * sd[d];
    }
    const DiagGaussian g(mu, sd);
    double offset = 0.0;
    for (int d = 0; d < dim; ++d) offset += 0.5 * kLog2Pi + std::log(sd[d]);
    const double reference = std::max(1e-6, -log_prob(g, a) - offset);
    CHECK(priority(g, a, 1e-6) == doctest::Approx(reference).epsilon(1e-9));
  }
}

TEST_CASE("priority invariant under joint translation") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const double mu = rng.normal(), sd = rng.uniform(0.3, 2.0);
    const double a = mu + rng.uniform(-3.0, 3.0) * sd;
    const double shift = rng.normal(0.0, 5.0);
    const double p0 = priority(DiagGaussian({mu}, {sd}), std::vector<double>{a});
    const double p1 =
        priority(DiagGaussian({mu + shift}, {sd}), std::vector<double>{a + shift});
    CHECK(p0 == doctest::Approx(p1).epsilon(1e-9));
  }
}

TEST_CASE("entropy_gain_exact refit") {
  SampleSet1D two({-1.0, 1.0});
  CHECK(entropy_gain_exact(two, 0.0) ==
        doctest::Approx(0.5 * std::log(2.0 / 3.0)).epsilon(1e-12));
  // symmetric probes give equal gains
  for (double t : {0.5, 1.7, 3.0}) {
    CHECK(entropy_gain_exact(two, t) ==
          doctest::Approx(entropy_gain_exact(two, -t)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(entropy_gain_exact(SampleSet1D({2.0, 2.0, 2.0}), 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(SampleSet1D({1.0}), std::invalid_argument);
}

TEST_CASE("entropy_gain_exact matches the closed form on random sets") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.uniform_index(200);
    std::vector<double> values(n);
    for (auto& v : values) v = rng.normal(rng.uniform(-2.0, 2.0), rng.uniform(0.5, 2.0));
    SampleSet1D set(values);
    const double mu = set.mle_mean();
    const double var = set.mle_var();
    const double t = mu + rng.uniform(-4.0, 4.0) * std::sqrt(var);
    const double nd = static_cast<double>(n);
    const double closed =
        0.5 * std::log(nd / (nd + 1.0) * (1.0 + (t - mu) * (t - mu) / ((nd + 1.0) * var)));
    CHECK(entropy_gain_exact(set, t) == doctest::Approx(closed).epsilon(1e-9));
  }
}

TEST_CASE("entropy_gain_approx values and large-N agreement") {
  CHECK(entropy_gain_approx(100, 0.0, 1.0, 3.0) == doctest::Approx(0.045).epsilon(1e-12));
  CHECK(entropy_gain_approx(7, 2.5, 0.8, 2.5) == doctest::Approx(0.0));

  // spec's worked case: 100 points at mean 0, variance 1, probe at 3
  std::vector<double> values(100);
  for (std::size_t i = 0; i < 100; ++i) {
    values[i] = (i % 2 == 0) ? 1.0 : -1.0;  // mean 0, MLE variance exactly 1
  }
  SampleSet1D set(values);
  const double exact = entropy_gain_exact(set, 3.0);
  CHECK(exact == doctest::Approx(0.5 * std::log((100.0 / 101.0) * (1.0 + 9.0 / 101.0)))
                     .epsilon(1e-12));
  CHECK(std::abs(exact - entropy_gain_approx(100, 0.0, 1.0, 3.0)) <= 0.01);

  Rng rng(19);
  for (long n : {100L, 400L}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> v(static_cast<std::size_t>(n));
      for (auto& x : v) x = rng.normal(1.0, 2.0);
      SampleSet1D s(v);
      const double mu = s.mle_mean();
      const double sd = std::sqrt(s.mle_var());
      const double t = mu + rng.uniform(-3.0, 3.0) * sd;
      CHECK(std::abs(entropy_gain_exact(s, t) - entropy_gain_approx(n, mu, sd, t)) <=
            1.0 / static_cast<double>(n));
    }
  }
}

TEST_CASE("select_max_gain") {
  const DiagGaussian unit({0.0}, {1.0});
  std::vector<GainCandidate> single{{0, {0.3}, unit}};
  CHECK(select_max_gain(single) == 0);

  std::vector<GainCandidate> two{{0, {0.1}, unit}, {1, {1.5}, unit}};
  CHECK(select_max_gain(two) == 1);

  // all actions at their conditional means: everything clamps, lowest index wins
  std::vector<GainCandidate> ties{
      {0, {2.0}, DiagGaussian({2.0}, {0.5})},
      {1, {-1.0}, DiagGaussian({-1.0}, {1.5})},
      {2, {0.0}, DiagGaussian({0.0}, {3.0})},
  };
  CHECK(select_max_gain(ties) == 0);

  CHECK_THROWS_AS(select_max_gain({}), std::invalid_argument);
}

TEST_CASE("select_max_gain ranking unaffected by a positive constant scale") {
  Rng rng(23);
  std::vector<GainCandidate> candidates;
  std::vector<double> scores;
  for (int i = 0; i < 12; ++i) {
    const double mu = rng.normal(), sd = rng.uniform(0.3, 2.0);
    const double a = mu + rng.uniform(-3.0, 3.0) * sd;
    candidates.push_back({static_cast<std::size_t>(i), {a}, DiagGaussian({mu}, {sd})});
    scores.push_back(priority(candidates.back().conditional, candidates.back().action));
  }
  const std::size_t chosen = select_max_gain(candidates);
  for (double c : {0.5, 3.0, 1234.5}) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i] / c > scores[best] / c) best = i;
    }
    CHECK(best == chosen);
  }
}

TEST_CASE("knn_entropy against closed forms") {
  Rng rng(29);
  const int n = 10000;

  std::vector<std::vector<double>> normal(n);
  for (auto& p : normal) p = {rng.normal()};
  const double h_normal = 0.5 * std::log(2.0 * kPi * std::exp(1.0));
  CHECK(knn_entropy(normal, 3) == doctest::Approx(h_normal).epsilon(0.05 / h_normal));

  std::vector<std::vector<double>> uniform(n);
  for (auto& p : uniform) p = {rng.uniform()};
  CHECK(std::abs(knn_entropy(uniform, 3)) <= 0.05);

  // scaling all points by 2 adds d*ln 2
  std::vector<std::vector<double>> scaled = normal;
  for (auto& p : scaled) p[0] *= 2.0;
  CHECK(knn_entropy(scaled, 3) - knn_entropy(normal, 3) ==
        doctest::Approx(std::log(2.0)).epsilon(0.05 / std::log(2.0)));
}

TEST_CASE("knn_entropy duplicate points stay finite") {
  std::vector<std::vector<double>> pts(10, std::vector<double>{1.0, 2.0});
  CHECK(std::isfinite(knn_entropy(pts, 3)));
  CHECK_THROWS_AS(knn_entropy({{0.0}, {1.0}}, 3), std::invalid_argument);
}

TEST_SUITE_END();
