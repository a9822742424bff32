#pragma once

#include <string>
#include <vector>

#include "ud/corpus.hpp"
#include "ud/tensor.hpp"

namespace ud {

enum class AttentionSource { None, Internal, External };
enum class AttentionFocus { Words, Hidden };
enum class Integration { Average, KmaxAverage, KmaxSequence, KmaxPooling };

AttentionSource parse_source(const std::string& s);
AttentionFocus parse_focus(const std::string& s);
Integration parse_integration(const std::string& s);
std::string to_string(AttentionSource s);
std::string to_string(AttentionFocus f);
std::string to_string(Integration m);

// f(x_i) = w . x_i
struct InternalScorer {
  TensorPtr w;  // [focus_dim]

  static InternalScorer init(std::size_t focus_dim, Rng& rng);

  TensorPtr score(Tape& tape, const TensorPtr& x_i) const;
  // all rows at once: [n]
  TensorPtr scores(Tape& tape, const TensorPtr& focus) const;
};

// f(x_i) = sum_j V . tanh(U1 x_i + U2 c_j); cue vectors are constants
struct ExternalScorer {
  TensorPtr U1;  // [att_hidden x focus_dim]
  TensorPtr U2;  // [att_hidden x emb_dim]
  TensorPtr V;   // [att_hidden]

  static ExternalScorer init(std::size_t att_hidden, std::size_t focus_dim,
                             std::size_t emb_dim, Rng& rng);

  TensorPtr score(Tape& tape, const TensorPtr& x_i,
                  const CueLexicon& lexicon) const;
  TensorPtr scores(Tape& tape, const TensorPtr& focus,
                   const CueLexicon& lexicon) const;
};

// softmax of the scores; sum 1, all positive, shift-invariant
TensorPtr attention_weights(Tape& tape, const TensorPtr& scores);

// a_i = alpha_i * x_i
TensorPtr reweight(Tape& tape, const TensorPtr& x, const TensorPtr& alpha);

// Integration of the reweighted rows `a` using the attention weights for
// ranking. Average and k-max average yield a d-vector; the k-max sequence
// and k-max pooling modes yield a k x d matrix (zero-padded when k > n).
// Ties in the weight ranking go to the earlier position.
TensorPtr integrate(Tape& tape, const TensorPtr& a, const TensorPtr& alpha,
                    Integration mode, std::size_t k);

// positions of the top-k weights, ascending (the k-max sequence selection)
std::vector<std::size_t> top_k_positions(const std::vector<double>& alpha,
                                         std::size_t k);

}  // namespace ud
