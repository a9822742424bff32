#include "ud/eval.hpp"

#include <cmath>
#include <map>

#include "ud/errors.hpp"
#include "ud/rng.hpp"

namespace ud {

EvalReport score(const std::vector<int>& predictions,
                 const std::vector<int>& gold) {
  if (predictions.size() != gold.size() || gold.empty())
    throw UsageError("score: prediction/gold lengths differ or are empty");
  EvalReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == 1 && gold[i] == 1) ++r.tp;
    else if (predictions[i] == 1) ++r.fp;
    else if (gold[i] == 1) ++r.fn;
    else ++r.tn;
  }
  r.degenerate = (r.tp + r.fp == 0) && (r.tp + r.fn == 0);
  r.precision = r.tp + r.fp > 0 ? double(r.tp) / double(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? double(r.tp) / double(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

std::vector<BucketF1> bucketed_f1(const std::vector<Example>& examples,
                                  const std::vector<int>& predictions,
                                  BucketKey key, const EmbeddingTable* table,
                                  std::size_t bucket_width) {
  if (examples.size() != predictions.size())
    throw UsageError("bucketed_f1: example/prediction lengths differ");
  if (key == BucketKey::OovCount && !table)
    throw UsageError("bucketed_f1: OOV bucketing needs an embedding table");
  std::map<std::size_t, std::pair<std::vector<int>, std::vector<int>>> buckets;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    std::size_t v = key == BucketKey::Length
                        ? examples[i].tokens.size()
                        : table->oov_count(examples[i].tokens);
    auto& [preds, gold] = buckets[v / bucket_width];
    preds.push_back(predictions[i]);
    gold.push_back(examples[i].label);
  }
  std::vector<BucketF1> out;
  for (const auto& [bucket, pg] : buckets)
    out.push_back({bucket, score(pg.first, pg.second).f1, pg.first.size()});
  return out;
}

namespace {

double f1_difference(const std::vector<int>& a, const std::vector<int>& b,
                     const std::vector<int>& gold) {
  return score(a, gold).f1 - score(b, gold).f1;
}

}  // namespace

double randomization_test(const std::vector<int>& preds_a,
                          const std::vector<int>& preds_b,
                          const std::vector<int>& gold,
                          std::size_t iterations, std::uint64_t seed) {
  if (preds_a.size() != preds_b.size() || preds_a.size() != gold.size())
    throw UsageError("randomization_test: length mismatch");
  double observed = std::abs(f1_difference(preds_a, preds_b, gold));
  Rng rng(seed);
  std::vector<int> a = preds_a, b = preds_b;
  std::size_t hits = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = preds_a[i];
      b[i] = preds_b[i];
      if (rng.coin()) std::swap(a[i], b[i]);
    }
    if (std::abs(f1_difference(a, b, gold)) >= observed - 1e-12) ++hits;
  }
  return double(hits + 1) / double(iterations + 1);
}

double randomization_test_exhaustive(const std::vector<int>& preds_a,
                                     const std::vector<int>& preds_b,
                                     const std::vector<int>& gold) {
  if (preds_a.size() != preds_b.size() || preds_a.size() != gold.size())
    throw UsageError("randomization_test: length mismatch");
  std::size_t n = preds_a.size();
  if (n > 20)
    throw UsageError("randomization_test_exhaustive: too many examples");
  double observed = std::abs(f1_difference(preds_a, preds_b, gold));
  std::vector<int> a(n), b(n);
  std::size_t hits = 0, total = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < total; ++mask) {
    for (std::size_t i = 0; i < n; ++i) {
      bool swap = (mask >> i) & 1;
      a[i] = swap ? preds_b[i] : preds_a[i];
      b[i] = swap ? preds_a[i] : preds_b[i];
    }
    if (std::abs(f1_difference(a, b, gold)) >= observed - 1e-12) ++hits;
  }
  return double(hits) / double(total);
}

std::vector<double> pooling_selection_frequency(
    const Model& model, const std::vector<std::string>& tokens) {
  if (model.cfg.encoder != Encoder::Cnn)
    throw UsageError("pooling_selection_frequency: CNN encoder required");
  Tape tape;
  auto trace = model.forward(tape, tokens);
  std::size_t n = tokens.size();
  std::size_t w = model.cfg.filter_width;
  std::vector<double> freq(n, 0.0);
  std::size_t slots = 0;
  for (const auto& picks : trace.pool_picks) {
    slots += picks.size();
    for (auto pos : picks)
      for (std::size_t j = 0; j < w; ++j) {
        std::size_t word = pos + j;
        if (word < n) freq[word] += 1.0;
      }
  }
  if (slots > 0)
    for (auto& f : freq) f /= double(slots);
  return freq;
}

std::vector<std::pair<std::string, double>> attention_heatmap(
    const Model& model, const std::vector<std::string>& tokens) {
  if (model.cfg.source == AttentionSource::None)
    throw UsageError("attention_heatmap: model has no attention layer");
  Tape tape;
  auto trace = model.forward(tape, tokens);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) out.emplace_back(tok, 0.0);
  for (std::size_t i = 0; i < trace.alpha.size(); ++i)
    out[trace.focus_to_token[i]].second += trace.alpha[i];
  return out;
}

}  // namespace ud
