#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ud/attention.hpp"
#include "ud/corpus.hpp"
#include "ud/embeddings.hpp"
#include "ud/layers.hpp"

namespace ud {

enum class Encoder { Cnn, Rnn };

Encoder parse_encoder(const std::string& s);
std::string to_string(Encoder e);

// One point in the attention design space plus dimensions.
struct ModelConfig {
  Encoder encoder = Encoder::Cnn;
  AttentionSource source = AttentionSource::None;
  AttentionFocus focus = AttentionFocus::Words;
  Integration integration = Integration::Average;
  std::size_t k = 3;             // k for the k-max integration modes
  std::size_t att_hidden = 100;  // external scorer hidden units
  bool combined = true;          // concatenate encoder output with attention

  std::size_t num_filters = 100;
  std::size_t filter_width = 3;
  std::size_t pool_k = 3;  // CNN k-max pooling
  std::size_t rnn_hidden = 10;
  GruLayer::Candidate gru_candidate = GruLayer::Candidate::Sigmoid;
  std::size_t hidden_units = 100;  // pre-output dense layer
  bool train_embeddings = false;

  void validate() const;  // throws ConfigError naming the field
};

// Per-sentence forward artifacts kept for analysis and prediction.
struct ForwardTrace {
  TensorPtr logit;  // scalar
  double prob = 0.0;
  std::vector<double> alpha;  // attention weights per focus position
  // focus position -> token index (n-gram center for CNN hidden focus)
  std::vector<std::size_t> focus_to_token;
  // CNN k-max pooling picks: per filter, selected conv positions
  std::vector<std::vector<std::size_t>> pool_picks;
  std::size_t conv_positions = 0;

  int label() const { return prob >= 0.5 ? 1 : 0; }
};

struct Model {
  ModelConfig cfg;
  EmbeddingTable table;
  CueLexicon lexicon;  // empty unless source == External

  ConvLayer conv;            // encoder == Cnn
  GruLayer gru_fwd, gru_bwd; // encoder == Rnn
  InternalScorer internal;   // source == Internal
  ExternalScorer external;   // source == External
  DenseLayer hidden;
  OutputLayer out;

  static Model init(const ModelConfig& cfg, EmbeddingTable table,
                    CueLexicon lexicon, std::uint64_t seed);

  ForwardTrace forward(Tape& tape,
                       const std::vector<std::string>& tokens) const;

  // trainable tensors, fixed order (includes the embedding matrix only when
  // train_embeddings is set)
  std::vector<TensorPtr> parameters() const;
  // name -> tensor pairs covering every parameter plus the embedding matrix,
  // for serialization
  std::vector<std::pair<std::string, TensorPtr>> named_tensors() const;

  std::size_t focus_dim() const;
  std::size_t encoder_dim() const;   // dim of r
  std::size_t attention_dim() const; // dim of flattened a
};

}  // namespace ud
