#pragma once

#include <utility>
#include <vector>

#include "ud/tensor.hpp"

namespace ud {

// seeded uniform in +-sqrt(6/(fan_in+fan_out))
TensorPtr glorot(std::vector<std::size_t> shape, std::size_t fan_in,
                 std::size_t fan_out, Rng& rng);

// Narrow 1-D convolution over token positions; inputs shorter than the
// filter are right-padded with zero vectors.
struct ConvLayer {
  std::size_t filter_width = 3;
  std::size_t num_filters = 0;
  std::size_t input_dim = 0;
  TensorPtr weights;  // [num_filters x filter_width*input_dim]
  TensorPtr bias;     // [num_filters]

  static ConvLayer init(std::size_t filter_width, std::size_t num_filters,
                        std::size_t input_dim, Rng& rng);

  // row t = tanh(weights . concat(x_t .. x_{t+w-1}) + bias);
  // output has max(1, n - filter_width + 1) rows
  TensorPtr forward(Tape& tape, const TensorPtr& x) const;
};

// alias over the tensor primitive, with optional selection-index export
TensorPtr kmax_pool(Tape& tape, const TensorPtr& x, std::size_t k,
                    std::vector<std::vector<std::size_t>>* picks = nullptr);

// Gated recurrent layer, no biases:
//   r = sigma(Wr x + Ur h), z = sigma(Wz x + Uz h)
//   cand = act(W x + U (r .* h)), h' = z .* h + (1-z) .* cand
struct GruLayer {
  enum class Candidate { Sigmoid, Tanh };

  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  TensorPtr W, U;    // candidate
  TensorPtr Wr, Ur;  // reset gate
  TensorPtr Wz, Uz;  // update gate
  Candidate candidate = Candidate::Sigmoid;

  static GruLayer init(std::size_t input_dim, std::size_t hidden_dim,
                       Candidate candidate, Rng& rng);

  TensorPtr step(Tape& tape, const TensorPtr& x_t,
                 const TensorPtr& h_prev) const;
};

// states: row t = concat(forward state t, backward state t);
// final = concat(forward last state, backward state at position 0)
std::pair<TensorPtr, TensorPtr> bigru_encode(Tape& tape, const GruLayer& fwd,
                                             const GruLayer& bwd,
                                             const TensorPtr& x);

// h = tanh(W1 a + W2 r + b); either input path may be absent
struct DenseLayer {
  TensorPtr W1;  // attention path, may be null
  TensorPtr W2;  // encoder path, may be null
  TensorPtr b;

  TensorPtr forward(Tape& tape, const TensorPtr& a, const TensorPtr& r) const;
};

// logistic output unit: p = sigma(w . h + b)
struct OutputLayer {
  TensorPtr w;
  TensorPtr b;  // scalar

  static OutputLayer init(std::size_t dim, Rng& rng);

  TensorPtr logit(Tape& tape, const TensorPtr& h) const;
};

}  // namespace ud
