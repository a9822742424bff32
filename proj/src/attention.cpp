#include "ud/attention.hpp"

#include <algorithm>
#include <numeric>

#include "ud/errors.hpp"

namespace ud {

AttentionSource parse_source(const std::string& s) {
  if (s == "none") return AttentionSource::None;
  if (s == "internal") return AttentionSource::Internal;
  if (s == "external") return AttentionSource::External;
  throw ConfigError("source: expected none|internal|external, got '" + s + "'");
}

AttentionFocus parse_focus(const std::string& s) {
  if (s == "words") return AttentionFocus::Words;
  if (s == "hidden") return AttentionFocus::Hidden;
  throw ConfigError("focus: expected words|hidden, got '" + s + "'");
}

Integration parse_integration(const std::string& s) {
  if (s == "average") return Integration::Average;
  if (s == "kmax_average") return Integration::KmaxAverage;
  if (s == "kmax_sequence") return Integration::KmaxSequence;
  if (s == "kmax_pooling") return Integration::KmaxPooling;
  throw ConfigError(
      "integration: expected average|kmax_average|kmax_sequence|kmax_pooling, "
      "got '" + s + "'");
}

std::string to_string(AttentionSource s) {
  switch (s) {
    case AttentionSource::None: return "none";
    case AttentionSource::Internal: return "internal";
    default: return "external";
  }
}

std::string to_string(AttentionFocus f) {
  return f == AttentionFocus::Words ? "words" : "hidden";
}

std::string to_string(Integration m) {
  switch (m) {
    case Integration::Average: return "average";
    case Integration::KmaxAverage: return "kmax_average";
    case Integration::KmaxSequence: return "kmax_sequence";
    default: return "kmax_pooling";
  }
}

InternalScorer InternalScorer::init(std::size_t focus_dim, Rng& rng) {
  return {Tensor::uniform({focus_dim}, -0.1, 0.1, rng)};
}

TensorPtr InternalScorer::score(Tape& tape, const TensorPtr& x_i) const {
  return dot(tape, w, x_i);
}

TensorPtr InternalScorer::scores(Tape& tape, const TensorPtr& focus) const {
  return matvec(tape, focus, w);
}

ExternalScorer ExternalScorer::init(std::size_t att_hidden,
                                    std::size_t focus_dim,
                                    std::size_t emb_dim, Rng& rng) {
  ExternalScorer s;
  s.U1 = Tensor::uniform({att_hidden, focus_dim}, -0.1, 0.1, rng);
  s.U2 = Tensor::uniform({att_hidden, emb_dim}, -0.1, 0.1, rng);
  s.V = Tensor::uniform({att_hidden}, -0.1, 0.1, rng);
  return s;
}

TensorPtr ExternalScorer::score(Tape& tape, const TensorPtr& x_i,
                                const CueLexicon& lexicon) const {
  if (lexicon.empty())
    throw ConfigError("external attention requires a non-empty cue lexicon");
  auto u1x = matvec(tape, U1, x_i);
  TensorPtr total;
  for (const auto& cue : lexicon.vectors) {
    auto term =
        dot(tape, V, tanh_op(tape, add(tape, u1x, matvec(tape, U2, cue))));
    total = total ? add(tape, total, term) : term;
  }
  return total;
}

TensorPtr ExternalScorer::scores(Tape& tape, const TensorPtr& focus,
                                 const CueLexicon& lexicon) const {
  std::size_t n = focus->shape[0];
  std::vector<TensorPtr> per_pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto x_i = flatten(tape, gather_rows(tape, focus, {i}));
    per_pos[i] = score(tape, x_i, lexicon);
  }
  return concat(tape, per_pos);
}

TensorPtr attention_weights(Tape& tape, const TensorPtr& scores) {
  return softmax(tape, scores);
}

TensorPtr reweight(Tape& tape, const TensorPtr& x, const TensorPtr& alpha) {
  return row_scale(tape, x, alpha);
}

std::vector<std::size_t> top_k_positions(const std::vector<double>& alpha,
                                         std::size_t k) {
  std::size_t take = std::min(k, alpha.size());
  std::vector<std::size_t> order(alpha.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](std::size_t i, std::size_t j) {
                      return alpha[i] != alpha[j] ? alpha[i] > alpha[j]
                                                  : i < j;
                    });
  order.resize(take);
  std::sort(order.begin(), order.end());
  return order;
}

TensorPtr integrate(Tape& tape, const TensorPtr& a, const TensorPtr& alpha,
                    Integration mode, std::size_t k) {
  if (a->rank() != 2 || alpha->size() != a->shape[0])
    throw DimensionError("integrate: weights/rows mismatch");
  if (mode != Integration::Average && k < 1)
    throw UsageError("integrate: k must be >= 1");
  switch (mode) {
    case Integration::Average:
      return sum_rows(tape, a);
    case Integration::KmaxAverage: {
      auto idx = top_k_positions(alpha->values, k);
      return sum_rows(tape, gather_rows(tape, a, idx));
    }
    case Integration::KmaxSequence: {
      auto idx = top_k_positions(alpha->values, k);
      auto rows = gather_rows(tape, a, idx);
      return idx.size() < k ? pad_rows(tape, rows, k) : rows;
    }
    case Integration::KmaxPooling:
      return kmax_per_column(tape, a, k, nullptr);
  }
  throw UsageError("integrate: unknown mode");
}

}  // namespace ud
