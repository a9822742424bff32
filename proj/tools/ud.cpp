#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ud/corpus.hpp"
#include "ud/embeddings.hpp"
#include "ud/errors.hpp"
#include "ud/eval.hpp"
#include "ud/model.hpp"
#include "ud/serialize.hpp"
#include "ud/training.hpp"

namespace {

struct ModelFlags {
  std::string encoder = "cnn";
  std::string source = "none";
  std::string focus = "words";
  std::string integration = "average";
  std::size_t k = 3;
  std::size_t att_hidden = 100;
  bool attention_only = false;
  std::size_t num_filters = 100;
  std::size_t filter_width = 3;
  std::size_t pool_k = 3;
  std::size_t rnn_hidden = 10;
  std::string gru_candidate = "sigmoid";
  std::size_t hidden_units = 100;
  bool train_embeddings = false;

  ud::ModelConfig to_config() const {
    ud::ModelConfig cfg;
    cfg.encoder = ud::parse_encoder(encoder);
    cfg.source = ud::parse_source(source);
    cfg.focus = ud::parse_focus(focus);
    cfg.integration = ud::parse_integration(integration);
    cfg.k = k;
    cfg.att_hidden = att_hidden;
    cfg.combined = !attention_only;
    cfg.num_filters = num_filters;
    cfg.filter_width = filter_width;
    cfg.pool_k = pool_k;
    cfg.rnn_hidden = rnn_hidden;
    if (gru_candidate != "sigmoid" && gru_candidate != "tanh")
      throw ud::ConfigError("gru-candidate: expected sigmoid|tanh, got '" +
                            gru_candidate + "'");
    cfg.gru_candidate = gru_candidate == "tanh"
                            ? ud::GruLayer::Candidate::Tanh
                            : ud::GruLayer::Candidate::Sigmoid;
    cfg.hidden_units = hidden_units;
    cfg.train_embeddings = train_embeddings;
    cfg.validate();
    return cfg;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--encoder", f.encoder, "cnn|rnn");
  cmd->add_option("--source", f.source, "attention source: none|internal|external");
  cmd->add_option("--focus", f.focus, "attention focus: words|hidden");
  cmd->add_option("--integration", f.integration,
                  "average|kmax_average|kmax_sequence|kmax_pooling");
  cmd->add_option("--k", f.k, "k for the k-max integration modes");
  cmd->add_option("--att-hidden", f.att_hidden, "external scorer hidden units");
  cmd->add_flag("--attention-only", f.attention_only,
                "drop the encoder path into the pre-output layer");
  cmd->add_option("--num-filters", f.num_filters, "convolution filters");
  cmd->add_option("--filter-width", f.filter_width, "convolution filter width");
  cmd->add_option("--pool-k", f.pool_k, "CNN k-max pooling k");
  cmd->add_option("--rnn-hidden", f.rnn_hidden, "GRU hidden units per direction");
  cmd->add_option("--gru-candidate", f.gru_candidate,
                  "candidate activation: sigmoid|tanh");
  cmd->add_option("--hidden-units", f.hidden_units, "pre-output layer units");
  cmd->add_flag("--train-embeddings", f.train_embeddings,
                "update embeddings during training");
}

std::vector<int> predict_labels(const ud::Model& model,
                                const std::vector<ud::Example>& corpus) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& ex : corpus) {
    ud::Tape tape;
    labels.push_back(model.forward(tape, ex.tokens).label());
  }
  return labels;
}

std::vector<int> load_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ud::ParseError("cannot open predictions file: " + path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] != '0' && line[0] != '1')
      throw ud::ParseError(path + ":" + std::to_string(line_no) +
                           ": expected a 0/1 label");
    labels.push_back(line[0] - '0');
  }
  return labels;
}

int run(int argc, char** argv) {
  CLI::App app{"uncertainty-detection sequence classifier"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train a model");
  ModelFlags mf;
  add_model_flags(train_cmd, mf);
  std::string emb_path, train_path, lexicon_path, model_out, metrics_out;
  std::string optimizer = "auto";
  double lr = -1.0, l2 = 1e-5, clip_norm = -1.0, dev_fraction = 0.2;
  std::size_t minibatch = 10, epochs = 0, max_cue_phrases = 0;
  std::uint64_t seed = 1;
  bool full_train = false;
  std::string export_lexicon_path;
  train_cmd->add_option("--embeddings", emb_path, "embedding text file")->required();
  train_cmd->add_option("--train", train_path, "training corpus TSV")->required();
  train_cmd->add_option("--lexicon", lexicon_path, "cue lexicon file (one phrase per line)");
  train_cmd->add_option("--model-out", model_out, "output model file")->required();
  train_cmd->add_option("--metrics-out", metrics_out, "metrics log file (default stdout)");
  train_cmd->add_option("--optimizer", optimizer, "sgd|adagrad (default: sgd for cnn, adagrad for rnn)");
  train_cmd->add_option("--lr", lr, "learning rate (default: 0.03 sgd, 0.1 adagrad)");
  train_cmd->add_option("--minibatch", minibatch, "minibatch size");
  train_cmd->add_option("--l2", l2, "L2 regularization weight");
  train_cmd->add_option("--clip-norm", clip_norm,
                        "gradient clipping norm; 0 disables (default: 5 for rnn, off for cnn)");
  train_cmd->add_option("--epochs", epochs, "training epochs")->required();
  train_cmd->add_option("--seed", seed, "random seed");
  train_cmd->add_option("--dev-fraction", dev_fraction, "dev split fraction");
  train_cmd->add_flag("--full-train", full_train,
                      "train on the whole corpus for --epochs, no dev split");
  train_cmd->add_option("--max-cue-phrases", max_cue_phrases,
                        "keep only the most frequent cue phrases (0 = all)");
  train_cmd->add_option("--export-lexicon", export_lexicon_path,
                        "write the cue lexicon built from the train split");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a corpus");
  std::string eval_model, eval_corpus;
  bool buckets = false;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--corpus", eval_corpus)->required();
  eval_cmd->add_flag("--buckets", buckets, "also print F1 by length and OOV buckets");

  // ---- predict ----
  auto* predict_cmd = app.add_subcommand("predict", "label a corpus");
  std::string pred_model, pred_corpus;
  predict_cmd->add_option("--model", pred_model)->required();
  predict_cmd->add_option("--corpus", pred_corpus)->required();

  // ---- export-attention ----
  auto* export_cmd = app.add_subcommand(
      "export-attention", "CSV of attention heat maps and pooling frequencies");
  std::string exp_model, exp_corpus, exp_out;
  export_cmd->add_option("--model", exp_model)->required();
  export_cmd->add_option("--corpus", exp_corpus)->required();
  export_cmd->add_option("--out", exp_out, "output CSV (default stdout)");

  // ---- significance ----
  auto* sig_cmd = app.add_subcommand(
      "significance", "approximate randomization test on the F1 difference");
  std::string preds_a_path, preds_b_path, gold_path;
  std::size_t iterations = 10000;
  std::uint64_t sig_seed = 1;
  bool exhaustive = false;
  sig_cmd->add_option("--preds-a", preds_a_path, "predictions file A")->required();
  sig_cmd->add_option("--preds-b", preds_b_path, "predictions file B")->required();
  sig_cmd->add_option("--gold", gold_path, "gold corpus TSV")->required();
  sig_cmd->add_option("--iterations", iterations);
  sig_cmd->add_option("--seed", sig_seed);
  sig_cmd->add_flag("--exhaustive", exhaustive, "enumerate all swap patterns");

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    auto cfg = mf.to_config();
    auto table = ud::load_embeddings(emb_path, {}, seed);
    auto corpus = ud::load_corpus(train_path);
    if (corpus.empty()) throw ud::ParseError(train_path + ": empty corpus");

    std::vector<ud::Example> train_set, dev_set;
    if (full_train)
      train_set = corpus;
    else
      std::tie(train_set, dev_set) = ud::split_train_dev(corpus, dev_fraction, seed);

    ud::CueLexicon lexicon;
    if (!lexicon_path.empty())
      lexicon = ud::load_cue_lexicon(lexicon_path, table);
    else if (cfg.source == ud::AttentionSource::External)
      lexicon = ud::build_cue_lexicon(
          train_set, table,
          max_cue_phrases ? std::optional<std::size_t>(max_cue_phrases)
                          : std::nullopt);
    if (!export_lexicon_path.empty())
      ud::save_cue_lexicon(lexicon, export_lexicon_path);

    auto model = ud::Model::init(cfg, std::move(table), std::move(lexicon), seed);

    ud::TrainConfig tc;
    if (optimizer == "auto")
      tc.optimizer = cfg.encoder == ud::Encoder::Rnn ? ud::Optimizer::Adagrad
                                                     : ud::Optimizer::Sgd;
    else
      tc.optimizer = ud::parse_optimizer(optimizer);
    tc.lr = lr > 0 ? lr : (tc.optimizer == ud::Optimizer::Sgd ? 0.03 : 0.1);
    tc.minibatch = minibatch;
    tc.l2_weight = l2;
    if (clip_norm > 0)
      tc.clip_norm = clip_norm;
    else if (clip_norm < 0 && cfg.encoder == ud::Encoder::Rnn)
      tc.clip_norm = 5.0;
    tc.max_epochs = epochs;
    tc.seed = seed;

    auto result = ud::train(model, train_set, dev_set, tc);

    std::ofstream metrics_file;
    std::ostream* metrics = &std::cout;
    if (!metrics_out.empty()) {
      metrics_file.open(metrics_out);
      if (!metrics_file) throw ud::ParseError("cannot write " + metrics_out);
      metrics = &metrics_file;
    }
    char buf[160];
    for (const auto& m : result.metrics) {
      std::snprintf(buf, sizeof(buf),
                    "epoch=%zu train_loss=%.6f dev_p=%.4f dev_r=%.4f dev_f1=%.4f",
                    m.epoch, m.train_loss, m.dev_precision, m.dev_recall,
                    m.dev_f1);
      *metrics << buf << '\n';
    }
    if (result.best_epoch)
      *metrics << "best_epoch=" << result.best_epoch << '\n';

    ud::save_model(model, model_out);
  } else if (eval_cmd->parsed()) {
    auto model = ud::load_model(eval_model);
    auto corpus = ud::load_corpus(eval_corpus);
    auto preds = predict_labels(model, corpus);
    std::vector<int> gold;
    for (const auto& ex : corpus) gold.push_back(ex.label);
    auto r = ud::score(preds, gold);
    std::printf("precision=%.4f recall=%.4f f1=%.4f tp=%zu fp=%zu fn=%zu tn=%zu%s\n",
                r.precision, r.recall, r.f1, r.tp, r.fp, r.fn, r.tn,
                r.degenerate ? " degenerate=1" : "");
    if (buckets) {
      std::printf("key,bucket_start,f1,count\n");
      for (const auto& b :
           ud::bucketed_f1(corpus, preds, ud::BucketKey::Length))
        std::printf("length,%zu,%.4f,%zu\n", b.bucket * 10, b.f1, b.count);
      for (const auto& b : ud::bucketed_f1(corpus, preds, ud::BucketKey::OovCount,
                                           &model.table))
        std::printf("oov,%zu,%.4f,%zu\n", b.bucket * 10, b.f1, b.count);
    }
  } else if (predict_cmd->parsed()) {
    auto model = ud::load_model(pred_model);
    auto corpus = ud::load_corpus(pred_corpus);
    for (const auto& ex : corpus) {
      ud::Tape tape;
      auto trace = model.forward(tape, ex.tokens);
      std::printf("%d\t%.6f\n", trace.label(), trace.prob);
    }
  } else if (export_cmd->parsed()) {
    auto model = ud::load_model(exp_model);
    auto corpus = ud::load_corpus(exp_corpus);
    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (!exp_out.empty()) {
      out_file.open(exp_out);
      if (!out_file) throw ud::ParseError("cannot write " + exp_out);
      out = &out_file;
    }
    *out << "sentence,token_index,token,attention,pool_freq\n";
    bool has_attention = model.cfg.source != ud::AttentionSource::None;
    bool has_pooling = model.cfg.encoder == ud::Encoder::Cnn;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      const auto& tokens = corpus[s].tokens;
      std::vector<std::pair<std::string, double>> heat;
      std::vector<double> pool;
      if (has_attention) heat = ud::attention_heatmap(model, tokens);
      if (has_pooling) pool = ud::pooling_selection_frequency(model, tokens);
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        *out << s << ',' << i << ',' << tokens[i] << ',';
        if (has_attention) *out << heat[i].second;
        *out << ',';
        if (has_pooling) *out << pool[i];
        *out << '\n';
      }
    }
  } else if (sig_cmd->parsed()) {
    auto preds_a = load_label_file(preds_a_path);
    auto preds_b = load_label_file(preds_b_path);
    auto gold_corpus = ud::load_corpus(gold_path);
    std::vector<int> gold;
    for (const auto& ex : gold_corpus) gold.push_back(ex.label);
    double p = exhaustive
                   ? ud::randomization_test_exhaustive(preds_a, preds_b, gold)
                   : ud::randomization_test(preds_a, preds_b, gold, iterations,
                                            sig_seed);
    std::printf("p=%.6f\n", p);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ud::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ud::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const ud::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ud::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
