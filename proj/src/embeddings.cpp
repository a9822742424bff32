#include "ud/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "ud/errors.hpp"

namespace ud {

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  std::size_t row = index_of(token);
  auto begin = matrix->values.begin() + row * dim;
  return std::vector<double>(begin, begin + dim);
}

std::size_t EmbeddingTable::oov_count(
    const std::vector<std::string>& tokens) const {
  std::size_t n = 0;
  for (const auto& tok : tokens)
    if (vocab.find(tok) == vocab.end()) ++n;
  return n;
}

EmbeddingTable EmbeddingTable::random(const std::vector<std::string>& tokens,
                                      std::size_t dim, std::uint64_t seed) {
  EmbeddingTable table;
  table.dim = dim;
  Rng rng(seed);
  std::vector<double> rows;
  for (const auto& tok : tokens) {
    if (table.vocab.count(tok)) continue;
    table.vocab.emplace(tok, table.vocab.size());
    for (std::size_t j = 0; j < dim; ++j)
      rows.push_back(rng.uniform(-0.25, 0.25));
  }
  table.unk_index = table.vocab.size();
  for (std::size_t j = 0; j < dim; ++j)
    rows.push_back(rng.uniform(-0.25, 0.25));
  table.matrix = Tensor::matrix(table.vocab.size() + 1, dim, std::move(rows));
  return table;
}

EmbeddingTable load_embeddings(const std::string& path,
                               std::optional<std::size_t> expected_dim,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embeddings file: " + path);

  EmbeddingTable table;
  std::vector<double> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);

    // "count dim" header: first line, token numeric, exactly one float
    if (line_no == 1 && vec.size() == 1 &&
        token.find_first_not_of("0123456789") == std::string::npos) {
      std::size_t header_dim = static_cast<std::size_t>(vec[0]);
      if (expected_dim && *expected_dim != header_dim)
        throw ParseError(path + ":1: header dim " +
                         std::to_string(header_dim) + " != expected " +
                         std::to_string(*expected_dim));
      expected_dim = header_dim;
      continue;
    }
    if (vec.empty())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": no vector values");
    if (table.dim == 0) table.dim = expected_dim.value_or(vec.size());
    if (vec.size() != table.dim)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.dim) + " floats, got " +
                       std::to_string(vec.size()));
    if (table.vocab.count(token)) continue;  // first occurrence wins
    table.vocab.emplace(token, table.vocab.size());
    rows.insert(rows.end(), vec.begin(), vec.end());
  }
  if (table.vocab.empty()) throw ParseError(path + ": no embeddings found");

  Rng rng(seed);
  table.unk_index = table.vocab.size();
  for (std::size_t j = 0; j < table.dim; ++j)
    rows.push_back(rng.uniform(-0.25, 0.25));
  table.matrix =
      Tensor::matrix(table.vocab.size() + 1, table.dim, std::move(rows));
  return table;
}

TensorPtr embed_sentence(Tape& tape, const EmbeddingTable& table,
                         const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw UsageError("embed_sentence: empty token list");
  std::vector<std::size_t> idx;
  idx.reserve(tokens.size());
  for (const auto& tok : tokens) idx.push_back(table.index_of(tok));
  if (table.trainable) return gather_rows(tape, table.matrix, idx);
  // frozen: plain constant copy, no backward step
  auto out = Tensor::zeros({tokens.size(), table.dim});
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < table.dim; ++j)
      out->at(i, j) = table.matrix->at(idx[i], j);
  return out;
}

}  // namespace ud
