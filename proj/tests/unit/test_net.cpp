#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "memr/net.hpp"

using namespace memr;

TEST_SUITE_BEGIN("net");

TEST_CASE("forward basics") {
  // identity layer: weight I, bias 0
  Net id(std::vector<LayerSpec>{{2, 2, Activation::kIdentity}});
  auto params = id.params();
  params[0] = 1.0;  // W row-major 2x2
  params[3] = 1.0;
  const auto out = id.forward(std::vector<double>{0.7, -1.2});
  CHECK(out[0] == doctest::Approx(0.7));
  CHECK(out[1] == doctest::Approx(-1.2));

  // w=2, b=1: f(3) = 7
  Net affine(std::vector<LayerSpec>{{1, 1, Activation::kIdentity}});
  affine.params()[0] = 2.0;
  affine.params()[1] = 1.0;
  CHECK(affine.forward(std::vector<double>{3.0})[0] == doctest::Approx(7.0));

  // relu with all-negative pre-activations
  Net relu(std::vector<LayerSpec>{{1, 3, Activation::kRelu}});
  auto rp = relu.params();
  rp[0] = rp[1] = rp[2] = 1.0;
  rp[3] = rp[4] = rp[5] = -10.0;
  const auto zeros = relu.forward(std::vector<double>{1.0});
  for (double z : zeros) CHECK(z == 0.0);

  CHECK_THROWS_AS(affine.forward(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("forward purity") {
  Rng rng(3);
  Net net = Net::mlp({3, 16, 2}, Activation::kTanh, Activation::kIdentity, rng);
  std::vector<double> x{0.1, -2.0, 0.5};
  const auto a = net.forward(x);
  const auto b = net.forward(x);
  CHECK(a == b);
}

TEST_CASE("backward product rule") {
  Net net(std::vector<LayerSpec>{{1, 1, Activation::kIdentity}});
  net.params()[0] = 2.0;  // w
  net.params()[1] = 0.0;  // b
  GradTape tape;
  net.forward(std::vector<double>{3.0}, tape);
  std::vector<double> grad(2, 0.0), in_grad(1, 0.0);
  net.backward(tape, std::vector<double>{1.0}, grad, in_grad);
  CHECK(grad[0] == doctest::Approx(3.0));  // dw = x
  CHECK(grad[1] == doctest::Approx(1.0));  // db = out_grad
  CHECK(in_grad[0] == doctest::Approx(2.0));  // dx = w

  // zero output grad -> zero everywhere
  GradTape tape2;
  net.forward(std::vector<double>{3.0}, tape2);
  std::vector<double> zgrad(2, 0.0);
  net.backward(tape2, std::vector<double>{0.0}, zgrad);
  CHECK(zgrad[0] == 0.0);
  CHECK(zgrad[1] == 0.0);
}

TEST_CASE("tape reuse is rejected") {
  Rng rng(5);
  Net net = Net::mlp({2, 4, 1}, Activation::kRelu, Activation::kIdentity, rng);
  GradTape tape;
  net.forward(std::vector<double>{1.0, 2.0}, tape);
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(tape, std::vector<double>{1.0}, grad);
  CHECK_THROWS_AS(net.backward(tape, std::vector<double>{1.0}, grad),
                  std::invalid_argument);
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(7);
  for (int draw = 0; draw < 100; ++draw) {
    const auto hidden = draw % 3 == 0 ? Activation::kRelu
                        : draw % 3 == 1 ? Activation::kTanh
                                        : Activation::kIdentity;
    Net net = Net::mlp({3, 8, 6, 2}, hidden, Activation::kIdentity, rng);
    std::vector<double> x{rng.normal(), rng.normal(), rng.normal()};
    std::vector<double> w{rng.normal(), rng.normal()};  // scalarizing weights

    auto loss = [&]() {
      const auto out = net.forward(x);
      return w[0] * out[0] + w[1] * out[1];
    };

    GradTape tape;
    net.forward(x, tape);
    std::vector<double> grad(net.param_count(), 0.0);
    net.backward(tape, w, grad);

    auto params = net.params();
    const double h = 1e-5;
    for (std::size_t i = 0; i < params.size(); i += 7) {  // sampled subset
      const double keep = params[i];
      params[i] = keep + h;
      const double up = loss();
      params[i] = keep - h;
      const double down = loss();
      params[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::abs(grad[i] - fd) <=
            1e-4 * std::max({std::abs(grad[i]), std::abs(fd), 1e-4}));
    }
  }
}

TEST_CASE("gaussian_nll values and gradients") {
  // mean = target, log_var = 0
  std::vector<double> mean{1.0, -2.0, 0.5};
  std::vector<double> lv{0.0, 0.0, 0.0};
  CHECK(gaussian_nll(mean, lv, mean) == doctest::Approx(1.5 * kLog2Pi).epsilon(1e-12));

  std::vector<double> d_mean(3, 0.0), d_lv(3, 0.0);
  gaussian_nll(mean, lv, mean, d_mean, d_lv);
  for (double g : d_mean) CHECK(g == doctest::Approx(0.0));

  // mean 0, log_var 0, target 2: loss = 2 + 0.5 ln 2pi
  CHECK(gaussian_nll(std::vector<double>{0.0}, std::vector<double>{0.0},
                     std::vector<double>{2.0}) ==
        doctest::Approx(2.0 + 0.5 * kLog2Pi).epsilon(1e-12));

  CHECK_THROWS_AS(gaussian_nll(std::vector<double>{0.0}, std::vector<double>{0.0},
                               std::vector<double>{std::nan("")}),
                  std::runtime_error);

  // finite differences of the scalar loss
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> m{rng.normal()}, l{rng.uniform(-2.0, 2.0)}, t{rng.normal()};
    std::vector<double> dm(1, 0.0), dl(1, 0.0);
    gaussian_nll(m, l, t, dm, dl);
    const double h = 1e-6;
    auto at = [&](double mm, double ll) {
      return gaussian_nll(std::vector<double>{mm}, std::vector<double>{ll}, t);
    };
    const double fdm = (at(m[0] + h, l[0]) - at(m[0] - h, l[0])) / (2.0 * h);
    const double fdl = (at(m[0], l[0] + h) - at(m[0], l[0] - h)) / (2.0 * h);
    CHECK(dm[0] == doctest::Approx(fdm).epsilon(1e-5));
    CHECK(dl[0] == doctest::Approx(fdl).epsilon(1e-5));
  }
}

TEST_CASE("adam_step behavior") {
  // zero gradient leaves parameters unchanged
  AdamState adam(3, 1e-3);
  std::vector<double> params{1.0, -2.0, 0.5};
  const auto before = params;
  adam.apply(params, std::vector<double>{0.0, 0.0, 0.0});
  CHECK(params == before);

  // first step moves by ~lr against the gradient sign
  AdamState a2(2, 1e-3);
  std::vector<double> p2{0.0, 0.0};
  a2.apply(p2, std::vector<double>{0.5, -2.0});
  CHECK(p2[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(p2[1] == doctest::Approx(1e-3).epsilon(1e-4));

  // determinism
  AdamState a3(1, 1e-2), a4(1, 1e-2);
  std::vector<double> p3{1.0}, p4{1.0};
  for (int i = 0; i < 10; ++i) {
    a3.apply(p3, std::vector<double>{0.3});
    a4.apply(p4, std::vector<double>{0.3});
  }
  CHECK(p3[0] == p4[0]);
}

TEST_CASE("parameter blob round trip") {
  Rng rng(13);
  Net net = Net::mlp({4, 8, 3}, Activation::kTanh, Activation::kTanh, rng);
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  net.save(ss);
  Net restored = Net::load(ss);
  REQUIRE(restored.param_count() == net.param_count());
  for (std::size_t i = 0; i < net.param_count(); ++i) {
    CHECK(restored.params()[i] == net.params()[i]);
  }
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  CHECK(restored.forward(x) == net.forward(x));

  // truncated stream fails loudly
  std::stringstream truncated(ss.str().substr(0, 20),
                              std::ios::in | std::ios::binary);
  CHECK_THROWS_AS(Net::load(truncated), std::runtime_error);
}

TEST_SUITE_END();
