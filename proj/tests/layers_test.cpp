#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "ud/layers.hpp"

using namespace ud;
using ud::testing::grad_check;
using ud::testing::random_tensor;

TEST_CASE("conv with zero weights outputs zeros") {
  Rng rng(1);
  auto layer = ConvLayer::init(3, 2, 4, rng);
  std::fill(layer.weights->values.begin(), layer.weights->values.end(), 0.0);
  Tape tape;
  auto out = layer.forward(tape, random_tensor({5, 4}, rng));
  CHECK(out->shape == std::vector<std::size_t>{3, 2});
  for (double v : out->values) CHECK(v == 0.0);
}

TEST_CASE("conv boundary: n == filter_width gives one position") {
  Rng rng(2);
  auto layer = ConvLayer::init(3, 2, 4, rng);
  Tape tape;
  auto out = layer.forward(tape, random_tensor({3, 4}, rng));
  CHECK(out->shape[0] == 1);
}

TEST_CASE("conv pads short sentences with zero vectors") {
  Rng rng(3);
  auto layer = ConvLayer::init(3, 2, 4, rng);
  Tape tape;
  auto x = random_tensor({1, 4}, rng);
  auto out = layer.forward(tape, x);
  REQUIRE(out->shape == std::vector<std::size_t>{1, 2});
  // oracle: window = [x_0, 0, 0]
  for (std::size_t f = 0; f < 2; ++f) {
    double s = layer.bias->values[f];
    for (std::size_t j = 0; j < 4; ++j) s += layer.weights->at(f, j) * x->at(0, j);
    CHECK(out->at(0, f) == doctest::Approx(std::tanh(s)).epsilon(1e-12));
  }
}

TEST_CASE("conv matches sliding-window oracle") {
  Rng rng(4);
  auto layer = ConvLayer::init(3, 2, 4, rng);
  auto x = random_tensor({6, 4}, rng);
  Tape tape;
  auto out = layer.forward(tape, x);
  REQUIRE(out->shape == std::vector<std::size_t>{4, 2});
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t f = 0; f < 2; ++f) {
      double s = layer.bias->values[f];
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t d = 0; d < 4; ++d)
          s += layer.weights->at(f, j * 4 + d) * x->at(t + j, d);
      CHECK(out->at(t, f) == doctest::Approx(std::tanh(s)).epsilon(1e-12));
    }
  CHECK_THROWS_AS(layer.forward(tape, random_tensor({6, 5}, rng)),
                  DimensionError);
}

TEST_CASE("conv is position-equivariant") {
  Rng rng(5);
  auto layer = ConvLayer::init(3, 2, 3, rng);
  auto x = random_tensor({7, 3}, rng);
  auto shifted = Tensor::zeros({8, 3});
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 3; ++j) shifted->at(i + 1, j) = x->at(i, j);
  Tape tape;
  auto out = layer.forward(tape, x);
  auto out_shifted = layer.forward(tape, shifted);
  for (std::size_t t = 0; t < out->shape[0]; ++t)
    for (std::size_t f = 0; f < 2; ++f)
      CHECK(out->at(t, f) ==
            doctest::Approx(out_shifted->at(t + 1, f)).epsilon(1e-12));
}

TEST_CASE("kmax_pool matches per-column sort oracle and is a subsequence") {
  Rng rng(6);
  auto x = random_tensor({7, 3}, rng);
  Tape tape;
  auto out = kmax_pool(tape, x, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < 7; ++r) col.push_back(x->at(r, c));
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    sorted.resize(3);
    // output values are the top 3, and appear in input order
    std::vector<double> got{out->at(0, c), out->at(1, c), out->at(2, c)};
    std::vector<double> got_sorted = got;
    std::sort(got_sorted.begin(), got_sorted.end(), std::greater<>());
    CHECK(got_sorted == sorted);
    std::size_t cursor = 0;
    for (double v : got) {
      while (cursor < col.size() && col[cursor] != v) ++cursor;
      CHECK(cursor < col.size());
    }
  }

  auto same = kmax_pool(tape, x, 7);  // m == k keeps everything
  CHECK(same->values == x->values);
}

TEST_CASE("gru analytic zero-weight case") {
  Rng rng(7);
  auto layer = GruLayer::init(3, 2, GruLayer::Candidate::Sigmoid, rng);
  for (auto& w : {layer.W, layer.U, layer.Wr, layer.Ur, layer.Wz, layer.Uz})
    std::fill(w->values.begin(), w->values.end(), 0.0);
  Tape tape;
  auto h = layer.step(tape, Tensor::vector({1, 2, 3}), Tensor::zeros({2}));
  for (double v : h->values) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("gru update gate saturation keeps the previous state") {
  Rng rng(8);
  auto layer = GruLayer::init(1, 1, GruLayer::Candidate::Sigmoid, rng);
  for (auto& w : {layer.W, layer.U, layer.Wr, layer.Ur, layer.Uz})
    std::fill(w->values.begin(), w->values.end(), 0.0);
  layer.Wz->values[0] = 1000.0;  // z -> 1 through the input
  Tape tape;
  auto h_prev = Tensor::vector({0.37});
  auto h = layer.step(tape, Tensor::vector({1.0}), h_prev);
  CHECK(h->values[0] == doctest::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("gru matches scalar recurrence oracle") {
  Rng rng(9);
  auto layer = GruLayer::init(1, 1, GruLayer::Candidate::Sigmoid, rng);
  double x = 0.8, hp = -0.3;
  Tape tape;
  auto h = layer.step(tape, Tensor::vector({x}), Tensor::vector({hp}));
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  double r = sig(layer.Wr->values[0] * x + layer.Ur->values[0] * hp);
  double z = sig(layer.Wz->values[0] * x + layer.Uz->values[0] * hp);
  double cand = sig(layer.W->values[0] * x + layer.U->values[0] * r * hp);
  double expected = z * hp + (1 - z) * cand;
  CHECK(h->values[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gru state boundedness") {
  Rng rng(10);
  for (auto cand : {GruLayer::Candidate::Sigmoid, GruLayer::Candidate::Tanh}) {
    auto layer = GruLayer::init(2, 3, cand, rng);
    Tape tape;
    auto h = Tensor::zeros({3});
    for (int t = 0; t < 10; ++t) {
      h = layer.step(tape, random_tensor({2}, rng, 2.0), h);
      for (double v : h->values) {
        if (cand == GruLayer::Candidate::Sigmoid) {
          CHECK(v > 0.0);
          CHECK(v < 1.0);
        } else {
          CHECK(v > -1.0);
          CHECK(v < 1.0);
        }
      }
    }
  }
}

TEST_CASE("bigru single position: final equals the only state row") {
  Rng rng(11);
  auto fwd = GruLayer::init(2, 3, GruLayer::Candidate::Sigmoid, rng);
  auto bwd = GruLayer::init(2, 3, GruLayer::Candidate::Sigmoid, rng);
  Tape tape;
  auto [states, final] = bigru_encode(tape, fwd, bwd, random_tensor({1, 2}, rng));
  REQUIRE(states->shape == std::vector<std::size_t>{1, 6});
  CHECK(states->values == final->values);
}

TEST_CASE("bigru palindrome symmetry with shared weights") {
  Rng rng(12);
  auto fwd = GruLayer::init(2, 3, GruLayer::Candidate::Sigmoid, rng);
  auto bwd = fwd;  // same weights both directions
  auto x = Tensor::matrix(5, 2, {1, 2, 3, 4, 5, 6, 3, 4, 1, 2});  // palindrome
  Tape tape;
  auto [states, final] = bigru_encode(tape, fwd, bwd, x);
  std::size_t n = 5, h = 3;
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < h; ++j)
      CHECK(states->at(t, j) ==
            doctest::Approx(states->at(n - 1 - t, h + j)).epsilon(1e-12));
  (void)final;
}

TEST_CASE("bigru zero weights follow the iterated 0.25-step recurrence") {
  Rng rng(13);
  auto fwd = GruLayer::init(2, 2, GruLayer::Candidate::Sigmoid, rng);
  for (auto& w : {fwd.W, fwd.U, fwd.Wr, fwd.Ur, fwd.Wz, fwd.Uz})
    std::fill(w->values.begin(), w->values.end(), 0.0);
  auto bwd = fwd;
  std::size_t n = 4;
  Tape tape;
  auto [states, final] = bigru_encode(tape, fwd, bwd, Tensor::zeros({n, 2}));
  // h_t = 0.5 h_{t-1} + 0.25, h_0 = 0  =>  h_n = 0.5 (1 - 0.5^n)
  double expected = 0.5 * (1.0 - std::pow(0.5, double(n)));
  for (double v : final->values)
    CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  (void)states;
}

TEST_CASE("logistic output analytic cases and cross-entropy gradient") {
  Rng rng(14);
  auto out = OutputLayer::init(3, rng);
  std::fill(out.w->values.begin(), out.w->values.end(), 0.0);
  Tape tape;
  auto logit = out.logit(tape, Tensor::vector({1, 2, 3}));
  CHECK(sigmoid(logit->values[0]) == 0.5);

  out.b->values[0] = 50.0;  // saturation
  Tape tape2;
  auto big = out.logit(tape2, Tensor::vector({1, 2, 3}));
  CHECK(sigmoid(big->values[0]) == doctest::Approx(1.0).epsilon(1e-12));

  // d loss / d logit = p - y, against finite differences
  auto z = Tensor::scalar(0.7);
  for (double y : {0.0, 1.0}) {
    z->zero_grad();
    Tape t3;
    t3.backward(bce_with_logits(t3, z, y));
    CHECK(z->grad[0] ==
          doctest::Approx(sigmoid(z->values[0]) - y).epsilon(1e-12));
    CHECK(grad_check({z}, [&](Tape& t) { return bce_with_logits(t, z, y); }));
  }
}

TEST_CASE("dense layer with both paths absent W2 ignores r") {
  Rng rng(15);
  DenseLayer dense;
  dense.W1 = random_tensor({3, 4}, rng);
  dense.b = random_tensor({3}, rng);
  auto a = random_tensor({4}, rng);
  Tape tape;
  auto h = dense.forward(tape, a, nullptr);
  REQUIRE(h->size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    double s = dense.b->values[i];
    for (std::size_t j = 0; j < 4; ++j) s += dense.W1->at(i, j) * a->values[j];
    CHECK(h->values[i] == doctest::Approx(std::tanh(s)).epsilon(1e-12));
  }
}

TEST_CASE("layer gradient checks") {
  Rng rng(16);
  auto scalarize = [](Tape& t, TensorPtr v) {
    if (v->rank() == 2) v = flatten(t, v);
    return sum(t, tanh_op(t, v));
  };

  auto conv = ConvLayer::init(3, 2, 3, rng);
  auto x = random_tensor({5, 3}, rng);
  CHECK(grad_check({conv.weights, conv.bias, x}, [&](Tape& t) {
    return scalarize(t, conv.forward(t, x));
  }));

  auto gru = GruLayer::init(2, 3, GruLayer::Candidate::Sigmoid, rng);
  auto xr = random_tensor({4, 2}, rng);
  auto gbwd = GruLayer::init(2, 3, GruLayer::Candidate::Sigmoid, rng);
  CHECK(grad_check(
      {gru.W, gru.U, gru.Wr, gru.Ur, gru.Wz, gru.Uz, gbwd.W, gbwd.U, xr},
      [&](Tape& t) {
        auto [states, final] = bigru_encode(t, gru, gbwd, xr);
        (void)states;
        return scalarize(t, final);
      }));
}
