#include "ud/model.hpp"

#include <string>

#include "ud/errors.hpp"

namespace ud {

Encoder parse_encoder(const std::string& s) {
  if (s == "cnn") return Encoder::Cnn;
  if (s == "rnn") return Encoder::Rnn;
  throw ConfigError("encoder: expected cnn|rnn, got '" + s + "'");
}

std::string to_string(Encoder e) { return e == Encoder::Cnn ? "cnn" : "rnn"; }

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* key) {
    if (v == 0) throw ConfigError(std::string(key) + ": must be >= 1");
  };
  if (integration != Integration::Average) positive(k, "k");
  positive(hidden_units, "hidden_units");
  if (encoder == Encoder::Cnn) {
    positive(num_filters, "num_filters");
    positive(filter_width, "filter_width");
    positive(pool_k, "pool_k");
  } else {
    positive(rnn_hidden, "rnn_hidden");
  }
  if (source == AttentionSource::External) positive(att_hidden, "att_hidden");
  if (source == AttentionSource::None && !combined)
    throw ConfigError("combined: attention-only mode requires source != none");
}

std::size_t Model::focus_dim() const {
  if (cfg.focus == AttentionFocus::Words) return table.dim;
  return cfg.encoder == Encoder::Cnn ? cfg.num_filters : 2 * cfg.rnn_hidden;
}

std::size_t Model::encoder_dim() const {
  return cfg.encoder == Encoder::Cnn ? cfg.pool_k * cfg.num_filters
                                     : 2 * cfg.rnn_hidden;
}

std::size_t Model::attention_dim() const {
  switch (cfg.integration) {
    case Integration::Average:
    case Integration::KmaxAverage:
      return focus_dim();
    default:
      return cfg.k * focus_dim();
  }
}

Model Model::init(const ModelConfig& cfg, EmbeddingTable table,
                  CueLexicon lexicon, std::uint64_t seed) {
  cfg.validate();
  if (cfg.source == AttentionSource::External && lexicon.empty())
    throw ConfigError("lexicon: external attention requires cue phrases");
  Model m;
  m.cfg = cfg;
  m.table = std::move(table);
  m.table.trainable = cfg.train_embeddings;
  if (cfg.train_embeddings) {
    // private copy so training never mutates the caller's table
    auto copy = Tensor::zeros(m.table.matrix->shape);
    copy->values = m.table.matrix->values;
    m.table.matrix = copy;
  }
  m.lexicon = std::move(lexicon);

  Rng rng(seed);
  if (cfg.encoder == Encoder::Cnn) {
    m.conv = ConvLayer::init(cfg.filter_width, cfg.num_filters, m.table.dim, rng);
  } else {
    m.gru_fwd = GruLayer::init(m.table.dim, cfg.rnn_hidden, cfg.gru_candidate, rng);
    m.gru_bwd = GruLayer::init(m.table.dim, cfg.rnn_hidden, cfg.gru_candidate, rng);
  }
  if (cfg.source == AttentionSource::Internal)
    m.internal = InternalScorer::init(m.focus_dim(), rng);
  else if (cfg.source == AttentionSource::External)
    m.external = ExternalScorer::init(cfg.att_hidden, m.focus_dim(), m.table.dim, rng);

  std::size_t h = cfg.hidden_units;
  m.hidden.b = Tensor::zeros({h});
  if (cfg.source != AttentionSource::None) {
    std::size_t ad = m.attention_dim();
    m.hidden.W1 = glorot({h, ad}, ad, h, rng);
  }
  if (cfg.source == AttentionSource::None || cfg.combined) {
    std::size_t rd = m.encoder_dim();
    m.hidden.W2 = glorot({h, rd}, rd, h, rng);
  }
  m.out = OutputLayer::init(h, rng);
  return m;
}

ForwardTrace Model::forward(Tape& tape,
                            const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw UsageError("forward: empty token list");
  ForwardTrace trace;
  auto x = embed_sentence(tape, table, tokens);
  std::size_t n = tokens.size();

  // encoder representation r and hidden focus matrix
  TensorPtr r, hidden_mtx;
  if (cfg.encoder == Encoder::Cnn) {
    auto conv_out = conv.forward(tape, x);
    trace.conv_positions = conv_out->shape[0];
    auto pooled = kmax_pool(tape, conv_out, cfg.pool_k, &trace.pool_picks);
    r = flatten(tape, pooled);
    hidden_mtx = conv_out;
  } else {
    auto [states, final] = bigru_encode(tape, gru_fwd, gru_bwd, x);
    r = final;
    hidden_mtx = states;
  }

  TensorPtr a;
  if (cfg.source != AttentionSource::None) {
    TensorPtr focus = cfg.focus == AttentionFocus::Words ? tanh_op(tape, x)
                                                         : hidden_mtx;
    TensorPtr scores = cfg.source == AttentionSource::Internal
                           ? internal.scores(tape, focus)
                           : external.scores(tape, focus, lexicon);
    auto alpha = attention_weights(tape, scores);
    trace.alpha = alpha->values;
    auto weighted = reweight(tape, focus, alpha);
    auto integrated = integrate(tape, weighted, alpha, cfg.integration, cfg.k);
    a = integrated->rank() == 2 ? flatten(tape, integrated) : integrated;

    trace.focus_to_token.resize(focus->shape[0]);
    for (std::size_t i = 0; i < trace.focus_to_token.size(); ++i) {
      if (cfg.focus == AttentionFocus::Words || cfg.encoder == Encoder::Rnn)
        trace.focus_to_token[i] = i;
      else  // conv position -> n-gram center token
        trace.focus_to_token[i] =
            std::min(i + (cfg.filter_width - 1) / 2, n - 1);
    }
  }

  TensorPtr h;
  if (cfg.source == AttentionSource::None)
    h = hidden.forward(tape, nullptr, r);
  else if (cfg.combined)
    h = hidden.forward(tape, a, r);
  else
    h = hidden.forward(tape, a, nullptr);

  trace.logit = out.logit(tape, h);
  trace.prob = sigmoid(trace.logit->values[0]);
  return trace;
}

std::vector<TensorPtr> Model::parameters() const {
  std::vector<TensorPtr> params;
  if (cfg.encoder == Encoder::Cnn) {
    params.push_back(conv.weights);
    params.push_back(conv.bias);
  } else {
    for (const auto* g : {&gru_fwd, &gru_bwd})
      for (const auto& w : {g->W, g->U, g->Wr, g->Ur, g->Wz, g->Uz})
        params.push_back(w);
  }
  if (cfg.source == AttentionSource::Internal) params.push_back(internal.w);
  if (cfg.source == AttentionSource::External) {
    params.push_back(external.U1);
    params.push_back(external.U2);
    params.push_back(external.V);
  }
  if (hidden.W1) params.push_back(hidden.W1);
  if (hidden.W2) params.push_back(hidden.W2);
  params.push_back(hidden.b);
  params.push_back(out.w);
  params.push_back(out.b);
  if (cfg.train_embeddings) params.push_back(table.matrix);
  return params;
}

std::vector<std::pair<std::string, TensorPtr>> Model::named_tensors() const {
  std::vector<std::pair<std::string, TensorPtr>> named;
  if (cfg.encoder == Encoder::Cnn) {
    named.emplace_back("conv.weights", conv.weights);
    named.emplace_back("conv.bias", conv.bias);
  } else {
    const char* dirs[] = {"gru_fwd", "gru_bwd"};
    const GruLayer* grus[] = {&gru_fwd, &gru_bwd};
    for (int d = 0; d < 2; ++d) {
      std::string p = dirs[d];
      named.emplace_back(p + ".W", grus[d]->W);
      named.emplace_back(p + ".U", grus[d]->U);
      named.emplace_back(p + ".Wr", grus[d]->Wr);
      named.emplace_back(p + ".Ur", grus[d]->Ur);
      named.emplace_back(p + ".Wz", grus[d]->Wz);
      named.emplace_back(p + ".Uz", grus[d]->Uz);
    }
  }
  if (cfg.source == AttentionSource::Internal)
    named.emplace_back("internal.w", internal.w);
  if (cfg.source == AttentionSource::External) {
    named.emplace_back("external.U1", external.U1);
    named.emplace_back("external.U2", external.U2);
    named.emplace_back("external.V", external.V);
  }
  if (hidden.W1) named.emplace_back("hidden.W1", hidden.W1);
  if (hidden.W2) named.emplace_back("hidden.W2", hidden.W2);
  named.emplace_back("hidden.b", hidden.b);
  named.emplace_back("out.w", out.w);
  named.emplace_back("out.b", out.b);
  named.emplace_back("embeddings", table.matrix);
  return named;
}

}  // namespace ud
