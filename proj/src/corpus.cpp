#include "ud/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ud/errors.hpp"
#include "ud/rng.hpp"

namespace ud {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

TensorPtr phrase_vector(const std::vector<std::string>& phrase,
                        const EmbeddingTable& table) {
  std::vector<double> mean(table.dim, 0.0);
  for (const auto& word : phrase) {
    auto vec = table.lookup(word);
    for (std::size_t j = 0; j < table.dim; ++j) mean[j] += vec[j];
  }
  for (auto& v : mean) v /= static_cast<double>(phrase.size());
  return Tensor::vector(std::move(mean));
}

}  // namespace

void CueLexicon::recompute(const EmbeddingTable& table) {
  vectors.clear();
  for (const auto& p : phrases) vectors.push_back(phrase_vector(p, table));
}

Example parse_corpus_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string::size_type pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  auto err = [&](const std::string& what) {
    return ParseError("line " + std::to_string(line_no) + ": " + what);
  };
  if (fields.size() < 2) throw err("missing tokens field");
  if (fields[0] != "0" && fields[0] != "1")
    throw err("label must be 0 or 1, got '" + fields[0] + "'");

  Example ex;
  ex.label = fields[0] == "1" ? 1 : 0;
  ex.tokens = split_ws(fields[1]);
  if (ex.tokens.empty()) throw err("empty token list");
  if (fields.size() >= 3 && !fields[2].empty()) {
    std::istringstream ss(fields[2]);
    std::string phrase;
    while (std::getline(ss, phrase, '|')) {
      auto words = split_ws(phrase);
      if (words.empty()) throw err("empty cue phrase");
      ex.cues.push_back(std::move(words));
    }
  }
  return ex;
}

std::vector<Example> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  std::vector<Example> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    examples.push_back(parse_corpus_line(line, line_no));
  }
  return examples;
}

void save_corpus(const std::vector<Example>& examples,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write corpus file: " + path);
  for (const auto& ex : examples) {
    out << ex.label << '\t';
    for (std::size_t i = 0; i < ex.tokens.size(); ++i)
      out << (i ? " " : "") << ex.tokens[i];
    if (!ex.cues.empty()) {
      out << '\t';
      for (std::size_t p = 0; p < ex.cues.size(); ++p) {
        if (p) out << '|';
        for (std::size_t i = 0; i < ex.cues[p].size(); ++i)
          out << (i ? " " : "") << ex.cues[p][i];
      }
    }
    out << '\n';
  }
}

CueLexicon build_cue_lexicon(const std::vector<Example>& examples,
                             const EmbeddingTable& table,
                             std::optional<std::size_t> max_phrases) {
  // distinct phrases in first-seen order, with occurrence counts
  std::vector<std::vector<std::string>> phrases;
  std::vector<std::size_t> counts;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& ex : examples)
    for (const auto& cue : ex.cues) {
      auto it = index.find(cue);
      if (it == index.end()) {
        index.emplace(cue, phrases.size());
        phrases.push_back(cue);
        counts.push_back(1);
      } else {
        ++counts[it->second];
      }
    }
  if (phrases.empty())
    throw ConfigError(
        "no cue phrases found in training examples; external attention "
        "requires a non-empty cue lexicon");

  if (max_phrases && *max_phrases < phrases.size()) {
    std::vector<std::size_t> order(phrases.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return counts[a] > counts[b];
    });
    order.resize(*max_phrases);
    std::sort(order.begin(), order.end());  // keep first-seen order
    std::vector<std::vector<std::string>> kept;
    for (auto i : order) kept.push_back(phrases[i]);
    phrases = std::move(kept);
  }

  CueLexicon lexicon;
  lexicon.phrases = std::move(phrases);
  lexicon.recompute(table);
  return lexicon;
}

CueLexicon load_cue_lexicon(const std::string& path,
                            const EmbeddingTable& table) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open cue lexicon file: " + path);
  CueLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto words = split_ws(line);
    if (words.empty()) continue;
    if (std::find(lexicon.phrases.begin(), lexicon.phrases.end(), words) ==
        lexicon.phrases.end())
      lexicon.phrases.push_back(std::move(words));
  }
  if (lexicon.phrases.empty())
    throw ConfigError("cue lexicon file is empty: " + path);
  lexicon.recompute(table);
  return lexicon;
}

void save_cue_lexicon(const CueLexicon& lexicon, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write cue lexicon file: " + path);
  for (const auto& phrase : lexicon.phrases) {
    for (std::size_t i = 0; i < phrase.size(); ++i)
      out << (i ? " " : "") << phrase[i];
    out << '\n';
  }
}

std::pair<std::vector<Example>, std::vector<Example>> split_train_dev(
    const std::vector<Example>& examples, double dev_fraction,
    std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw UsageError("split_train_dev: dev_fraction must be in (0,1)");
  std::vector<Example> shuffled = examples;
  Rng rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
  std::size_t dev_size = static_cast<std::size_t>(
      std::floor(static_cast<double>(shuffled.size()) * dev_fraction + 0.5));
  std::vector<Example> dev(shuffled.end() - dev_size, shuffled.end());
  shuffled.resize(shuffled.size() - dev_size);
  return {std::move(shuffled), std::move(dev)};
}

}  // namespace ud
