#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ud/corpus.hpp"
#include "ud/model.hpp"

namespace ud {

// Precision/recall/F1 of the uncertain (positive) class.
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  // no positives in either predictions or gold: F1 reported as 0
  bool degenerate = false;
};

EvalReport score(const std::vector<int>& predictions,
                 const std::vector<int>& gold);

enum class BucketKey { Length, OovCount };

struct BucketF1 {
  std::size_t bucket = 0;  // [bucket*width, (bucket+1)*width)
  double f1 = 0.0;
  std::size_t count = 0;
};

// F1 per bucket of sentence length or OOV count; empty buckets omitted.
// The table is only consulted for OovCount.
std::vector<BucketF1> bucketed_f1(const std::vector<Example>& examples,
                                  const std::vector<int>& predictions,
                                  BucketKey key,
                                  const EmbeddingTable* table = nullptr,
                                  std::size_t bucket_width = 10);

// Approximate randomization over the F1 difference of two prediction sets:
// each iteration swaps A/B per example with probability 1/2;
// p = (#{|dF1_perm| >= |dF1_obs|} + 1) / (iterations + 1).
double randomization_test(const std::vector<int>& preds_a,
                          const std::vector<int>& preds_b,
                          const std::vector<int>& gold,
                          std::size_t iterations = 10000,
                          std::uint64_t seed = 1);

// Exact variant enumerating all 2^n swap patterns (n <= 20).
double randomization_test_exhaustive(const std::vector<int>& preds_a,
                                     const std::vector<int>& preds_b,
                                     const std::vector<int>& gold);

// For each word, the fraction of pooled (filter, rank) slots whose selected
// position's n-gram covers that word. CNN encoder only.
std::vector<double> pooling_selection_frequency(
    const Model& model, const std::vector<std::string>& tokens);

// Per-token attention weight of one forward pass; for hidden-focus CNN
// attention the weights are mapped to the n-gram center words.
std::vector<std::pair<std::string, double>> attention_heatmap(
    const Model& model, const std::vector<std::string>& tokens);

}  // namespace ud
