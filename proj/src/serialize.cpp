#include "ud/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ud/errors.hpp"

namespace ud {

namespace {

constexpr char kMagic[8] = {'U', 'D', 'M', 'O', 'D', 'E', 'L', '\n'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = (v >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw ParseError("model file: unexpected end of file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& in) {
  auto len = read_u64(in);
  std::string s(len, '\0');
  in.read(s.data(), std::streamsize(len));
  if (!in) throw ParseError("model file: unexpected end of file");
  return s;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  // host is little-endian; stored layout is little-endian IEEE 754
  out.write(reinterpret_cast<const char*>(v.data()),
            std::streamsize(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, std::size_t n) {
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          std::streamsize(n * sizeof(double)));
  if (!in) throw ParseError("model file: unexpected end of file");
  return v;
}

}  // namespace

std::map<std::string, std::string> config_to_map(const ModelConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["encoder"] = to_string(cfg.encoder);
  kv["source"] = to_string(cfg.source);
  kv["focus"] = to_string(cfg.focus);
  kv["integration"] = to_string(cfg.integration);
  kv["k"] = std::to_string(cfg.k);
  kv["att_hidden"] = std::to_string(cfg.att_hidden);
  kv["combined"] = cfg.combined ? "true" : "false";
  kv["num_filters"] = std::to_string(cfg.num_filters);
  kv["filter_width"] = std::to_string(cfg.filter_width);
  kv["pool_k"] = std::to_string(cfg.pool_k);
  kv["rnn_hidden"] = std::to_string(cfg.rnn_hidden);
  kv["gru_candidate"] =
      cfg.gru_candidate == GruLayer::Candidate::Tanh ? "tanh" : "sigmoid";
  kv["hidden_units"] = std::to_string(cfg.hidden_units);
  kv["train_embeddings"] = cfg.train_embeddings ? "true" : "false";
  return kv;
}

ModelConfig config_from_map(const std::map<std::string, std::string>& kv) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ConfigError(std::string(key) + ": missing configuration key");
    return it->second;
  };
  auto get_size = [&](const char* key) {
    return std::size_t(std::stoull(get(key)));
  };
  auto get_bool = [&](const char* key) {
    const auto& v = get(key);
    if (v != "true" && v != "false")
      throw ConfigError(std::string(key) + ": expected true|false, got '" + v + "'");
    return v == "true";
  };
  ModelConfig cfg;
  cfg.encoder = parse_encoder(get("encoder"));
  cfg.source = parse_source(get("source"));
  cfg.focus = parse_focus(get("focus"));
  cfg.integration = parse_integration(get("integration"));
  cfg.k = get_size("k");
  cfg.att_hidden = get_size("att_hidden");
  cfg.combined = get_bool("combined");
  cfg.num_filters = get_size("num_filters");
  cfg.filter_width = get_size("filter_width");
  cfg.pool_k = get_size("pool_k");
  cfg.rnn_hidden = get_size("rnn_hidden");
  cfg.gru_candidate = get("gru_candidate") == "tanh"
                          ? GruLayer::Candidate::Tanh
                          : GruLayer::Candidate::Sigmoid;
  cfg.hidden_units = get_size("hidden_units");
  cfg.train_embeddings = get_bool("train_embeddings");
  return cfg;
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write model file: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, kModelFormatVersion);

  std::ostringstream cfg_text;
  for (const auto& [k, v] : config_to_map(model.cfg))
    cfg_text << k << '=' << v << '\n';
  write_string(out, cfg_text.str());

  write_u64(out, model.lexicon.phrases.size());
  for (const auto& phrase : model.lexicon.phrases) {
    std::string joined;
    for (std::size_t i = 0; i < phrase.size(); ++i)
      joined += (i ? " " : "") + phrase[i];
    write_string(out, joined);
  }

  // vocabulary in row order
  std::vector<std::string> tokens(model.table.vocab.size());
  for (const auto& [tok, idx] : model.table.vocab) tokens[idx] = tok;
  write_u64(out, tokens.size());
  for (const auto& tok : tokens) write_string(out, tok);
  write_u64(out, model.table.unk_index);
  write_u64(out, model.table.dim);

  auto named = model.named_tensors();
  write_u64(out, named.size());
  for (const auto& [name, tensor] : named) {
    write_string(out, name);
    write_u64(out, tensor->rank());
    for (auto d : tensor->shape) write_u64(out, d);
    write_doubles(out, tensor->values);
  }
  if (!out) throw ParseError("write failed: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a model file: " + path);
  auto version = read_u64(in);
  if (version != kModelFormatVersion)
    throw ParseError("model file version " + std::to_string(version) +
                     " is incompatible with this binary (expects version " +
                     std::to_string(kModelFormatVersion) + ")");

  std::map<std::string, std::string> kv;
  {
    std::istringstream cfg_text(read_string(in));
    std::string line;
    while (std::getline(cfg_text, line)) {
      auto eq = line.find('=');
      if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  ModelConfig cfg = config_from_map(kv);

  CueLexicon lexicon;
  auto n_phrases = read_u64(in);
  for (std::uint64_t i = 0; i < n_phrases; ++i) {
    std::istringstream ss(read_string(in));
    std::vector<std::string> words;
    std::string w;
    while (ss >> w) words.push_back(w);
    lexicon.phrases.push_back(std::move(words));
  }

  EmbeddingTable table;
  auto n_tokens = read_u64(in);
  for (std::uint64_t i = 0; i < n_tokens; ++i)
    table.vocab.emplace(read_string(in), i);
  table.unk_index = read_u64(in);
  table.dim = read_u64(in);
  table.matrix = Tensor::zeros({n_tokens + 1, table.dim});

  auto n_tensors = read_u64(in);
  std::map<std::string, TensorPtr> tensors;
  for (std::uint64_t i = 0; i < n_tensors; ++i) {
    auto name = read_string(in);
    auto rank = read_u64(in);
    std::vector<std::size_t> shape;
    std::size_t count = 1;
    for (std::uint64_t r = 0; r < rank; ++r) {
      shape.push_back(read_u64(in));
      count *= shape.back();
    }
    auto t = Tensor::zeros(shape);
    t->values = read_doubles(in, count);
    tensors[name] = t;
  }

  auto emb_it = tensors.find("embeddings");
  if (emb_it == tensors.end())
    throw ParseError("model file: embeddings tensor missing");
  table.matrix = emb_it->second;
  if (!lexicon.phrases.empty()) lexicon.recompute(table);

  Model model = Model::init(cfg, std::move(table), std::move(lexicon), 0);
  for (auto& [name, target] : model.named_tensors()) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw ParseError("model file: tensor '" + name + "' missing");
    if (it->second->shape != target->shape)
      throw ParseError("model file: tensor '" + name + "' has wrong shape");
    target->values = it->second->values;
  }
  return model;
}

}  // namespace ud
