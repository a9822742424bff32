#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ud/tensor.hpp"

namespace ud {

// Vocabulary -> embedding row map with a dedicated unknown-word row.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::size_t> vocab;
  TensorPtr matrix;  // [|vocab|+1 x dim]
  std::size_t unk_index = 0;
  bool trainable = false;

  std::size_t index_of(const std::string& token) const {
    auto it = vocab.find(token);
    return it == vocab.end() ? unk_index : it->second;
  }

  std::vector<double> lookup(const std::string& token) const;

  // words of `tokens` mapped to the unknown row
  std::size_t oov_count(const std::vector<std::string>& tokens) const;

  // fresh table with random rows for the given tokens (tests, synthetic data)
  static EmbeddingTable random(const std::vector<std::string>& tokens,
                               std::size_t dim, std::uint64_t seed);
};

// Text format: optional "count dim" header, then one token + dim floats per
// line. The unknown row is seeded-uniform in [-0.25, 0.25]; duplicates keep
// their first occurrence.
EmbeddingTable load_embeddings(const std::string& path,
                               std::optional<std::size_t> expected_dim = {},
                               std::uint64_t seed = 1);

// Row i is token i's vector (unknown row for OOV). Recorded on the tape only
// when the table is trainable.
TensorPtr embed_sentence(Tape& tape, const EmbeddingTable& table,
                         const std::vector<std::string>& tokens);

}  // namespace ud
