#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ud/embeddings.hpp"
#include "ud/tensor.hpp"

namespace ud {

// One labeled sentence: 0 = certain, 1 = uncertain.
struct Example {
  int label = 0;
  std::vector<std::string> tokens;
  std::vector<std::vector<std::string>> cues;  // optional cue phrases

  bool operator==(const Example&) const = default;
};

// Distinct cue phrases with one vector each: the mean of the constituent
// word embeddings (unknown row for OOV constituents).
struct CueLexicon {
  std::vector<std::vector<std::string>> phrases;
  std::vector<TensorPtr> vectors;

  bool empty() const { return phrases.empty(); }
  std::size_t size() const { return phrases.size(); }

  // refresh vectors from the table (needed when embeddings are trainable)
  void recompute(const EmbeddingTable& table);
};

// TSV: label TAB space-separated tokens [TAB "|"-separated cue phrases]
std::vector<Example> load_corpus(const std::string& path);
void save_corpus(const std::vector<Example>& examples,
                 const std::string& path);
Example parse_corpus_line(const std::string& line, std::size_t line_no);

// Cue lexicon from training-split annotations. When max_phrases is set only
// the most frequent phrases are kept (frequency desc, first-seen order ties).
CueLexicon build_cue_lexicon(const std::vector<Example>& examples,
                             const EmbeddingTable& table,
                             std::optional<std::size_t> max_phrases = {});

// Plain text: one phrase per line, tokens space-separated.
CueLexicon load_cue_lexicon(const std::string& path,
                            const EmbeddingTable& table);
void save_cue_lexicon(const CueLexicon& lexicon, const std::string& path);

// Seeded shuffle then exact partition; dev size = round-half-up(n * fraction).
std::pair<std::vector<Example>, std::vector<Example>> split_train_dev(
    const std::vector<Example>& examples, double dev_fraction,
    std::uint64_t seed);

}  // namespace ud
