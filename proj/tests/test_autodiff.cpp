#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "tgqa/autodiff/gradcheck.hpp"
#include "tgqa/autodiff/ops.hpp"
#include "op_catalog.hpp"
#include "tgqa/error.hpp"

using namespace tgqa;
using namespace tgqa::ad;
using V = Var<double>;
using Vs = std::vector<V>;

namespace {

using catalog::random_tensor;
using catalog::weighted;

constexpr double kOpTol = 1e-4;

}  // namespace

TEST_CASE("forward examples") {
  Graph<double> g;
  const auto s = softmax(g.constant(Tensor<double>::matrix(1, 2, {0, 0})));
  CHECK(s.value().data[0] == 0.5);
  CHECK(s.value().data[1] == 0.5);

  const auto A = random_tensor(2, 5, 1);
  const auto eye = g.constant(Tensor<double>::matrix(2, 2, {1, 0, 0, 1}));
  CHECK(matmul(eye, g.constant(A)).value().data == A.data);

  const auto ce = cross_entropy(g.constant(Tensor<double>::matrix(1, 3, {0, 0, 0})), {1});
  CHECK(ce.value().data[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const auto t = transpose(g.constant(Tensor<double>::matrix(2, 3, {1, 2, 3, 4, 5, 6})));
  CHECK(t.value().shape == std::vector<int>{3, 2});
  CHECK(t.value()(2, 1) == 6);
}

TEST_CASE("shape errors name both shapes") {
  Graph<double> g;
  const auto a = g.constant(Tensor<double>(2, 3));
  const auto b = g.constant(Tensor<double>(2, 3));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("and [2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, g.constant(Tensor<double>(3, 2))), ShapeError);
  CHECK_THROWS_AS(cross_entropy(a, {0}), ShapeError);
  CHECK_THROWS_AS(cross_entropy(a, {0, 1}, Mask{1, 0, 0, 1, 0, 0}), ShapeError);
  CHECK_THROWS_AS(gather_rows(a, {2}), ShapeError);
  CHECK_THROWS_AS(slice_cols(a, 2, 2), ShapeError);
}

TEST_CASE("backward examples and tape errors") {
  SUBCASE("sum gives all-ones") {
    Graph<double> g;
    const auto x = g.input(random_tensor(3, 4, 2));
    g.backward(sum(x));
    for (double v : g.grad(x).data) CHECK(v == 1.0);
  }
  SUBCASE("mean of squares gives 2x/n") {
    Graph<double> g;
    const auto X = random_tensor(3, 4, 3);
    const auto x = g.input(X);
    g.backward(mean(mul(x, x)));
    const auto dx = g.grad(x);
    for (std::size_t i = 0; i < X.size(); ++i) CHECK(dx.data[i] == doctest::Approx(2 * X.data[i] / 12));
  }
  SUBCASE("repeated backward needs a reset") {
    Graph<double> g;
    const auto x = g.input(random_tensor(2, 2, 4));
    const auto loss = sum(x);
    g.backward(loss);
    CHECK_THROWS_AS(g.backward(loss), Error);
    g.reset_grads();
    g.backward(loss);
    CHECK(g.grad(x).data[0] == 1.0);
  }
  SUBCASE("non-scalar loss and detached variables") {
    Graph<double> g;
    const auto x = g.input(random_tensor(2, 2, 5));
    CHECK_THROWS_AS(g.backward(x), ShapeError);
    CHECK_THROWS_AS(g.backward(V{}), Error);
    Graph<double> other;
    CHECK_THROWS_AS(add(x, other.constant(Tensor<double>(2, 2))), Error);
  }
  SUBCASE("parameter sinks accumulate across graphs") {
    const auto W = random_tensor(3, 2, 6);
    Tensor<double> sink(3, 2);
    for (int rep = 0; rep < 2; ++rep) {
      Graph<double> g;
      g.backward(sum(g.parameter(W, &sink)));
    }
    for (double v : sink.data) CHECK(v == 2.0);
  }
  SUBCASE("constants receive no gradient") {
    Graph<double> g;
    const auto c = g.constant(random_tensor(2, 2, 7));
    const auto x = g.input(random_tensor(2, 2, 8));
    g.backward(sum(mul(c, x)));
    CHECK_FALSE(g.has_grad(c.id));
  }
  SUBCASE("constant program has exact zero gradient") {
    const double err = check_gradients(
        [](Graph<double>& g, V x) { return sum(add(scale(x, 0.0), g.constant(Tensor<double>(2, 2, 1.0)))); },
        random_tensor(2, 2, 9));
    CHECK(err == 0.0);
  }
}

TEST_CASE("gradient check: every catalog op") {
  for (const auto& c : catalog::op_cases()) {
    CAPTURE(c.name);
    const auto r = check_gradients(c.f, c.inputs, 1e-5, c.train_mode, c.seed);
    CHECK(r.max_rel_error < kOpTol);
  }
  SUBCASE("layer norm then sum") {
    const auto r = check_gradients(
        [](Graph<double>&, const Vs& v) { return sum(layer_norm(v[0], v[1], v[2])); },
        {random_tensor(4, 8, 48), random_tensor(1, 8, 49), random_tensor(1, 8, 50)});
    CHECK(r.max_rel_error < 1e-6);
  }
}

TEST_CASE("property: softmax normalizes and ignores shifts") {
  SplitMix64 rng(60);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(4)), m = 1 + static_cast<int>(rng.below(8));
    auto X = random_tensor(n, m, 1000 + trial);
    for (double& v : X.data) v *= 30;
    auto shifted = X;
    const double c = rng.uniform(-500, 500);
    for (double& v : shifted.data) v += c;
    Graph<double> g;
    const auto y = softmax(g.constant(X));
    const auto ys = softmax(g.constant(shifted));
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j < m; ++j) {
        s += y.value()(i, j);
        CHECK(std::abs(y.value()(i, j) - ys.value()(i, j)) < 1e-9);
        CHECK(std::isfinite(y.value()(i, j)));
      }
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
  }
  Graph<float> gf;
  const auto big = softmax(gf.constant(Tensor<float>::matrix(1, 3, {1e4f, -1e4f, 0.0f})));
  for (float v : big.value().data) CHECK(std::isfinite(v));
}

TEST_CASE("property: layer norm output is standardized before gain and bias") {
  SplitMix64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(5)), m = 2 + static_cast<int>(rng.below(30));
    auto X = random_tensor(n, m, 2000 + trial);
    for (double& v : X.data) v = v * 10 + 3;
    Graph<double> g;
    const auto y = layer_norm(g.constant(X), g.constant(Tensor<double>(1, m, 1.0)), g.constant(Tensor<double>(1, m)));
    for (int i = 0; i < n; ++i) {
      double mu = 0, var = 0;
      for (int j = 0; j < m; ++j) mu += y.value()(i, j) / m;
      for (int j = 0; j < m; ++j) var += (y.value()(i, j) - mu) * (y.value()(i, j) - mu) / m;
      CHECK(std::abs(mu) < 1e-6);
      CHECK(std::abs(var - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("property: dropout") {
  const auto X = random_tensor(4, 5, 62);
  {
    Graph<double> g(false, 1);
    const auto x = g.constant(X);
    CHECK(dropout(x, 0.5).value().data == X.data);
  }
  Graph<double> g(true, 7);
  const int n = 100000;
  const auto y = dropout(g.constant(Tensor<double>(1, n, 1.0)), 0.4);
  const double m = std::accumulate(y.value().data.begin(), y.value().data.end(), 0.0) / n;
  CHECK(std::abs(m - 1.0) < 0.02);
  int zeros = 0;
  for (double v : y.value().data) zeros += v == 0.0;
  CHECK(std::abs(zeros / double(n) - 0.4) < 0.02);
}

TEST_CASE("float and double agree on a small program") {
  const auto X = random_tensor(3, 4, 63);
  const auto W = random_tensor(4, 2, 64);
  Graph<double> gd;
  const auto yd = softmax(matmul(gd.constant(X), gd.constant(W)));
  Tensor<float> Xf(3, 4), Wf(4, 2);
  for (std::size_t i = 0; i < X.size(); ++i) Xf.data[i] = static_cast<float>(X.data[i]);
  for (std::size_t i = 0; i < W.size(); ++i) Wf.data[i] = static_cast<float>(W.data[i]);
  Graph<float> gf;
  const auto yf = softmax(matmul(gf.constant(Xf), gf.constant(Wf)));
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(yf.value().data[i] - yd.value().data[i]) < 1e-5);
}

TEST_CASE("gradient check detects a wrong backward rule") {
  // y = x^2 elementwise with backward claiming dy/dx = x.
  const Program wrong = [](Graph<double>& g, const Vs& v) {
    Tensor<double> y = g.value(v[0]);
    for (double& e : y.data) e *= e;
    const auto out = g.record(std::move(y), {v[0].id}, [](Graph<double>& g, int id) {
      const int in = g.inputs(id)[0];
      const auto& dy = g.grad_mut(id);
      auto& dx = g.grad_mut(in);
      for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += g.value(in).data[i] * dy.data[i];
    });
    return sum(out);
  };
  CHECK(check_gradients(wrong, {random_tensor(2, 3, 70, 0.1)}).max_rel_error > 0.3);
}
