#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "ud/attention.hpp"
#include "ud/layers.hpp"

using namespace ud;
using ud::testing::grad_check;
using ud::testing::random_tensor;

namespace {

CueLexicon toy_lexicon(std::size_t count, std::size_t dim, Rng& rng) {
  CueLexicon lex;
  for (std::size_t j = 0; j < count; ++j) {
    lex.phrases.push_back({"cue" + std::to_string(j)});
    lex.vectors.push_back(random_tensor({dim}, rng));
  }
  return lex;
}

// rank by descending weight, earlier position on ties (0 = largest)
std::size_t rank_of(const std::vector<double>& alpha, std::size_t i) {
  std::size_t r = 0;
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j] > alpha[i] || (alpha[j] == alpha[i] && j < i)) ++r;
  return r;
}

}  // namespace

TEST_CASE("internal scorer") {
  Tape tape;
  InternalScorer zero{Tensor::zeros({3})};
  CHECK(zero.score(tape, Tensor::vector({4, 5, 6}))->values[0] == 0.0);

  InternalScorer e2{Tensor::vector({0, 1, 0})};
  CHECK(e2.score(tape, Tensor::vector({7, -3, 1}))->values[0] == -3.0);

  Rng rng(1);
  InternalScorer s{random_tensor({16}, rng)};
  auto x = random_tensor({16}, rng);
  double oracle = 0.0;
  for (std::size_t i = 0; i < 16; ++i) oracle += s.w->values[i] * x->values[i];
  CHECK(s.score(tape, x)->values[0] == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("external scorer analytic and oracle cases") {
  Rng rng(2);
  auto lex = toy_lexicon(3, 4, rng);
  Tape tape;

  auto zeroV = ExternalScorer::init(4, 5, 4, rng);
  std::fill(zeroV.V->values.begin(), zeroV.V->values.end(), 0.0);
  CHECK(zeroV.score(tape, random_tensor({5}, rng), lex)->values[0] == 0.0);

  auto zeroU = ExternalScorer::init(4, 5, 4, rng);
  std::fill(zeroU.U1->values.begin(), zeroU.U1->values.end(), 0.0);
  std::fill(zeroU.U2->values.begin(), zeroU.U2->values.end(), 0.0);
  CHECK(zeroU.score(tape, random_tensor({5}, rng), lex)->values[0] == 0.0);

  auto s = ExternalScorer::init(4, 5, 4, rng);
  auto x = random_tensor({5}, rng);
  double oracle = 0.0;
  for (std::size_t j = 0; j < lex.size(); ++j)
    for (std::size_t h = 0; h < 4; ++h) {
      double pre = 0.0;
      for (std::size_t d = 0; d < 5; ++d) pre += s.U1->at(h, d) * x->values[d];
      for (std::size_t d = 0; d < 4; ++d)
        pre += s.U2->at(h, d) * lex.vectors[j]->values[d];
      oracle += s.V->values[h] * std::tanh(pre);
    }
  CHECK(s.score(tape, x, lex)->values[0] ==
        doctest::Approx(oracle).epsilon(1e-12));

  CHECK_THROWS_AS(s.score(tape, x, CueLexicon{}), ConfigError);
}

TEST_CASE("external scorer is invariant to cue order") {
  Rng rng(3);
  auto lex = toy_lexicon(4, 3, rng);
  auto s = ExternalScorer::init(3, 3, 3, rng);
  auto x = random_tensor({3}, rng);
  Tape tape;
  double base = s.score(tape, x, lex)->values[0];
  CueLexicon shuffled = lex;
  std::reverse(shuffled.phrases.begin(), shuffled.phrases.end());
  std::reverse(shuffled.vectors.begin(), shuffled.vectors.end());
  CHECK(s.score(tape, x, shuffled)->values[0] ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("external scorer gradient check") {
  Rng rng(4);
  auto lex = toy_lexicon(3, 4, rng);
  auto s = ExternalScorer::init(4, 5, 4, rng);
  auto focus = random_tensor({3, 5}, rng);
  CHECK(grad_check({s.U1, s.U2, s.V, focus}, [&](Tape& t) {
    return sum(t, softmax(t, s.scores(t, focus, lex)));
  }));
}

TEST_CASE("attention weights") {
  Tape tape;
  auto uniform = attention_weights(tape, Tensor::vector({0, 0, 0}));
  for (double v : uniform->values)
    CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

  auto two = attention_weights(tape, Tensor::vector({std::log(2.0), 0}));
  CHECK(two->values[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(two->values[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  auto large = attention_weights(tape, Tensor::vector({1000, 1000.1, 999}));
  double total = 0.0;
  for (double v : large->values) {
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // shift invariance
  Rng rng(5);
  auto s = random_tensor({6}, rng, 3.0);
  auto shifted = Tensor::vector(s->values);
  for (auto& v : shifted->values) v += 17.25;
  auto a1 = attention_weights(tape, s);
  auto a2 = attention_weights(tape, shifted);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(a1->values[i] == doctest::Approx(a2->values[i]).epsilon(1e-12));
}

TEST_CASE("reweight scales rows") {
  Rng rng(6);
  auto x = random_tensor({4, 3}, rng);
  Tape tape;

  auto uniform = reweight(tape, x, Tensor::vector({0.25, 0.25, 0.25, 0.25}));
  for (std::size_t i = 0; i < x->size(); ++i)
    CHECK(uniform->values[i] == doctest::Approx(x->values[i] / 4).epsilon(1e-12));

  auto onehot = reweight(tape, x, Tensor::vector({0, 0, 1, 0}));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(onehot->at(2, j) == x->at(2, j));
    CHECK(onehot->at(0, j) == 0.0);
  }

  auto alpha = random_tensor({4}, rng, 0.5);
  auto w = reweight(tape, x, alpha);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(w->at(i, j) ==
            doctest::Approx(alpha->values[i] * x->at(i, j)).epsilon(1e-12));

  CHECK_THROWS_AS(reweight(tape, x, Tensor::vector({1, 2})), DimensionError);
}

TEST_CASE("integrate honors the original-order rule") {
  Tape tape;
  auto a = Tensor::matrix(3, 2, {10, 11, 20, 21, 30, 31});
  auto alpha = Tensor::vector({0.1, 0.5, 0.4});
  auto seq = integrate(tape, a, alpha, Integration::KmaxSequence, 2);
  // rows 1 and 2 (the two largest weights), in original order
  CHECK(seq->values == std::vector<double>{20, 21, 30, 31});
}

TEST_CASE("integrate modes match the enumeration oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 5, d = 3, k = 2;
    auto a = random_tensor({n, d}, rng);
    Tape tape;
    auto alpha = softmax(tape, random_tensor({n}, rng));

    auto avg = integrate(tape, a, alpha, Integration::Average, k);
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += a->at(i, j);
      CHECK(avg->values[j] == doctest::Approx(s).epsilon(1e-12));
    }

    auto kavg = integrate(tape, a, alpha, Integration::KmaxAverage, k);
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (rank_of(alpha->values, i) < k) s += a->at(i, j);
      CHECK(kavg->values[j] == doctest::Approx(s).epsilon(1e-12));
    }

    auto kseq = integrate(tape, a, alpha, Integration::KmaxSequence, k);
    std::size_t row = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (rank_of(alpha->values, i) < k) {
        for (std::size_t j = 0; j < d; ++j)
          CHECK(kseq->at(row, j) == doctest::Approx(a->at(i, j)).epsilon(1e-12));
        ++row;
      }
    CHECK(row == k);

    auto kpool = integrate(tape, a, alpha, Integration::KmaxPooling, k);
    for (std::size_t j = 0; j < d; ++j) {
      std::size_t row2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;  // rank of a(i,j) within column j
        for (std::size_t i2 = 0; i2 < n; ++i2)
          if (a->at(i2, j) > a->at(i, j) ||
              (a->at(i2, j) == a->at(i, j) && i2 < i))
            ++r;
        if (r < k) {
          CHECK(kpool->at(row2, j) ==
                doctest::Approx(a->at(i, j)).epsilon(1e-12));
          ++row2;
        }
      }
    }
  }
}

TEST_CASE("integrate boundary identities and padding") {
  Rng rng(8);
  std::size_t n = 4, d = 2;
  auto a = random_tensor({n, d}, rng);
  Tape tape;
  auto alpha = softmax(tape, random_tensor({n}, rng));

  auto avg = integrate(tape, a, alpha, Integration::Average, 1);
  auto kavg = integrate(tape, a, alpha, Integration::KmaxAverage, n);
  for (std::size_t j = 0; j < d; ++j)
    CHECK(kavg->values[j] == doctest::Approx(avg->values[j]).epsilon(1e-12));

  // kmax_sequence with k = n returns the input unchanged
  auto kseq = integrate(tape, a, alpha, Integration::KmaxSequence, n);
  CHECK(kseq->values == a->values);

  // k > n degrades gracefully with zero padding
  auto padded = integrate(tape, a, alpha, Integration::KmaxSequence, n + 2);
  CHECK(padded->shape == std::vector<std::size_t>{n + 2, d});
  for (std::size_t j = 0; j < d; ++j) {
    CHECK(padded->at(n, j) == 0.0);
    CHECK(padded->at(n + 1, j) == 0.0);
  }
  auto kavg_big = integrate(tape, a, alpha, Integration::KmaxAverage, n + 2);
  for (std::size_t j = 0; j < d; ++j)
    CHECK(kavg_big->values[j] == doctest::Approx(avg->values[j]).epsilon(1e-12));
}

TEST_CASE("rank ties break toward earlier positions") {
  Tape tape;
  auto a = Tensor::matrix(3, 1, {1, 2, 3});
  auto alpha = Tensor::vector({0.4, 0.2, 0.4});
  auto seq = integrate(tape, a, alpha, Integration::KmaxSequence, 1);
  CHECK(seq->values[0] == 1.0);  // position 0 wins the tie
}

TEST_CASE("combine layer") {
  Rng rng(9);
  DenseLayer dense;
  dense.W1 = Tensor::zeros({2, 3});
  dense.W2 = Tensor::zeros({2, 4});
  dense.b = Tensor::zeros({2});
  Tape tape;
  auto h = dense.forward(tape, random_tensor({3}, rng), random_tensor({4}, rng));
  CHECK(h->values == std::vector<double>{0, 0});

  // random combined case vs affine+tanh oracle
  dense.W1 = random_tensor({2, 3}, rng);
  dense.W2 = random_tensor({2, 4}, rng);
  dense.b = random_tensor({2}, rng);
  auto a = random_tensor({3}, rng);
  auto r = random_tensor({4}, rng);
  auto h2 = dense.forward(tape, a, r);
  for (std::size_t i = 0; i < 2; ++i) {
    double s = dense.b->values[i];
    for (std::size_t j = 0; j < 3; ++j) s += dense.W1->at(i, j) * a->values[j];
    for (std::size_t j = 0; j < 4; ++j) s += dense.W2->at(i, j) * r->values[j];
    CHECK(h2->values[i] == doctest::Approx(std::tanh(s)).epsilon(1e-12));
  }
}
