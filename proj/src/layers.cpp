#include "ud/layers.hpp"

#include <cmath>
#include <string>

#include "ud/errors.hpp"

namespace ud {

TensorPtr glorot(std::vector<std::size_t> shape, std::size_t fan_in,
                 std::size_t fan_out, Rng& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return Tensor::uniform(std::move(shape), -limit, limit, rng);
}

ConvLayer ConvLayer::init(std::size_t filter_width, std::size_t num_filters,
                          std::size_t input_dim, Rng& rng) {
  ConvLayer layer;
  layer.filter_width = filter_width;
  layer.num_filters = num_filters;
  layer.input_dim = input_dim;
  std::size_t window = filter_width * input_dim;
  layer.weights = glorot({num_filters, window}, window, num_filters, rng);
  layer.bias = Tensor::zeros({num_filters});
  return layer;
}

TensorPtr ConvLayer::forward(Tape& tape, const TensorPtr& x) const {
  if (x->rank() != 2 || x->shape[1] != input_dim)
    throw DimensionError("conv_forward: input dim " +
                         std::to_string(x->cols()) + " != layer dim " +
                         std::to_string(input_dim));
  TensorPtr in = x;
  if (in->shape[0] < filter_width) in = pad_rows(tape, in, filter_width);
  std::size_t n = in->shape[0];
  std::size_t m = n - filter_width + 1;
  std::vector<TensorPtr> rows;
  rows.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    std::vector<std::size_t> idx(filter_width);
    for (std::size_t j = 0; j < filter_width; ++j) idx[j] = t + j;
    auto window = flatten(tape, gather_rows(tape, in, idx));
    rows.push_back(
        tanh_op(tape, add(tape, matvec(tape, weights, window), bias)));
  }
  return stack_rows(tape, rows);
}

TensorPtr kmax_pool(Tape& tape, const TensorPtr& x, std::size_t k,
                    std::vector<std::vector<std::size_t>>* picks) {
  return kmax_per_column(tape, x, k, picks);
}

GruLayer GruLayer::init(std::size_t input_dim, std::size_t hidden_dim,
                        Candidate candidate, Rng& rng) {
  GruLayer layer;
  layer.input_dim = input_dim;
  layer.hidden_dim = hidden_dim;
  layer.candidate = candidate;
  auto wi = [&] { return glorot({hidden_dim, input_dim}, input_dim, hidden_dim, rng); };
  auto wh = [&] { return glorot({hidden_dim, hidden_dim}, hidden_dim, hidden_dim, rng); };
  layer.W = wi();
  layer.U = wh();
  layer.Wr = wi();
  layer.Ur = wh();
  layer.Wz = wi();
  layer.Uz = wh();
  return layer;
}

TensorPtr GruLayer::step(Tape& tape, const TensorPtr& x_t,
                         const TensorPtr& h_prev) const {
  if (x_t->size() != input_dim || h_prev->size() != hidden_dim)
    throw DimensionError("gru_step: got input " + std::to_string(x_t->size()) +
                         "/state " + std::to_string(h_prev->size()) +
                         ", layer expects " + std::to_string(input_dim) + "/" +
                         std::to_string(hidden_dim));
  auto r = sigmoid_op(
      tape, add(tape, matvec(tape, Wr, x_t), matvec(tape, Ur, h_prev)));
  auto z = sigmoid_op(
      tape, add(tape, matvec(tape, Wz, x_t), matvec(tape, Uz, h_prev)));
  auto pre = add(tape, matvec(tape, W, x_t),
                 matvec(tape, U, mul(tape, r, h_prev)));
  auto cand = candidate == Candidate::Tanh ? tanh_op(tape, pre)
                                           : sigmoid_op(tape, pre);
  auto one_minus_z = add(tape, Tensor::scalar(1.0), scale(tape, z, -1.0));
  return add(tape, mul(tape, z, h_prev), mul(tape, one_minus_z, cand));
}

std::pair<TensorPtr, TensorPtr> bigru_encode(Tape& tape, const GruLayer& fwd,
                                             const GruLayer& bwd,
                                             const TensorPtr& x) {
  std::size_t n = x->shape[0];
  std::vector<TensorPtr> fwd_states(n), bwd_states(n);
  auto h = Tensor::zeros({fwd.hidden_dim});
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<std::size_t> idx{t};
    h = fwd.step(tape, flatten(tape, gather_rows(tape, x, idx)), h);
    fwd_states[t] = h;
  }
  h = Tensor::zeros({bwd.hidden_dim});
  for (std::size_t t = n; t-- > 0;) {
    std::vector<std::size_t> idx{t};
    h = bwd.step(tape, flatten(tape, gather_rows(tape, x, idx)), h);
    bwd_states[t] = h;
  }
  std::vector<TensorPtr> rows(n);
  for (std::size_t t = 0; t < n; ++t)
    rows[t] = concat(tape, {fwd_states[t], bwd_states[t]});
  auto states = stack_rows(tape, rows);
  auto final = concat(tape, {fwd_states[n - 1], bwd_states[0]});
  return {states, final};
}

TensorPtr DenseLayer::forward(Tape& tape, const TensorPtr& a,
                              const TensorPtr& r) const {
  if (!a && !r) throw UsageError("DenseLayer: no inputs");
  TensorPtr pre = b;
  if (a) {
    if (!W1) throw UsageError("DenseLayer: attention input without W1");
    pre = add(tape, pre, matvec(tape, W1, a));
  }
  if (r) {
    if (!W2) throw UsageError("DenseLayer: encoder input without W2");
    pre = add(tape, pre, matvec(tape, W2, r));
  }
  return tanh_op(tape, pre);
}

OutputLayer OutputLayer::init(std::size_t dim, Rng& rng) {
  OutputLayer layer;
  layer.w = glorot({dim}, dim, 1, rng);
  layer.b = Tensor::scalar(0.0);
  return layer;
}

TensorPtr OutputLayer::logit(Tape& tape, const TensorPtr& h) const {
  return add(tape, dot(tape, w, h), b);
}

}  // namespace ud
