#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "finetype/checkpoint.hpp"
#include "finetype/corpus.hpp"
#include "finetype/errors.hpp"
#include "finetype/inference.hpp"
#include "finetype/synth.hpp"
#include "finetype/trainer.hpp"
#include "finetype/transfer.hpp"

namespace {

using nlohmann::json;
using namespace finetype;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

Corpus load_filtered(const std::string& path, bool filter_pronominal) {
  Corpus c = load_corpus(path);
  FilterReport report;
  c = filter_invalid(c, &report);
  if (report.removed_unlabeled + report.removed_empty_span > 0) {
    std::cerr << path << ": dropped " << report.removed_unlabeled << " unlabeled and "
              << report.removed_empty_span << " zero-length mentions\n";
  }
  if (filter_pronominal) c = pronominal_filter(c);
  return c;
}

// Gold sets against a checkpoint's hierarchy; labels it cannot represent get
// indices past K so recall still pays for them.
std::vector<std::vector<std::size_t>> gold_sets(const Corpus& c, const TypeHierarchy& h) {
  std::vector<std::vector<std::size_t>> gold;
  gold.reserve(c.mentions.size());
  std::map<std::string, std::size_t> unknown;
  for (const MentionRecord& m : c.mentions) {
    std::vector<std::size_t> g;
    for (const std::string& path : m.labels) {
      if (h.contains(path)) {
        g.push_back(h.index_of(path));
      } else {
        auto [it, inserted] = unknown.try_emplace(path, h.k() + unknown.size());
        g.push_back(it->second);
      }
    }
    std::sort(g.begin(), g.end());
    gold.push_back(std::move(g));
  }
  return gold;
}

int cmd_stats(const std::string& path, bool as_json) {
  const CorpusStats st = corpus_stats(load_corpus(path));
  if (as_json) {
    json j{{"types", st.types},
           {"mentions", st.mentions},
           {"clean_mentions", st.clean_mentions},
           {"clean_pct", st.clean_pct},
           {"has_pos", st.has_pos},
           {"pronominal_mentions", st.pronominal_mentions},
           {"pronominal_pct", st.pronominal_pct},
           {"max_depth", st.max_depth}};
    std::cout << j.dump() << "\n";
    return 0;
  }
  std::printf("mentions      %zu\n", st.mentions);
  std::printf("types         %zu\n", st.types);
  std::printf("max depth     %zu\n", st.max_depth);
  std::printf("clean         %zu (%.1f%%)\n", st.clean_mentions, st.clean_pct);
  if (st.has_pos) {
    std::printf("pronominal    %zu (%.1f%%)\n", st.pronominal_mentions, st.pronominal_pct);
  } else {
    std::printf("pronominal    n/a (no POS tags)\n");
  }
  return 0;
}

struct SynthArgs {
  SynthSpec spec;
  std::string out;
  std::string eval_out;
  std::size_t eval_mentions = 0;
};

int cmd_synth(const SynthArgs& a) {
  save_corpus(synth_corpus(a.spec), a.out);
  std::cout << "wrote " << a.spec.n_mentions << " mentions to " << a.out << "\n";
  if (!a.eval_out.empty()) {
    SynthSpec eval = a.spec;
    eval.noise_rate = 0.0;
    eval.n_mentions = a.eval_mentions > 0 ? a.eval_mentions : a.spec.n_mentions / 5;
    if (eval.n_entities == 0) {
      eval.n_entities = a.spec.n_entities > 0
                            ? a.spec.n_entities
                            : std::max<std::size_t>(10, a.spec.n_mentions / 50);
    }
    save_corpus(synth_corpus(eval), a.eval_out);
    std::cout << "wrote " << eval.n_mentions << " clean eval mentions to " << a.eval_out << "\n";
  }
  return 0;
}

std::string string_field(const json& j, const char* key, std::vector<std::string>& errors,
                         bool required) {
  if (!j.contains(key)) {
    if (required) errors.push_back(std::string(key) + " is required");
    return {};
  }
  if (!j.at(key).is_string()) {
    errors.push_back(std::string(key) + " must be a string");
    return {};
  }
  return j.at(key).get<std::string>();
}

int cmd_train(const std::string& config_path) {
  std::ifstream f(config_path);
  if (!f) throw io_error("cannot open config file '" + config_path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw format_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw format_error("config must be a JSON object");

  std::vector<std::string> errors;
  TrainConfig cfg = train_config_from_json(j, errors);
  const std::string train_path = string_field(j, "train_path", errors, true);
  const std::string dev_path = string_field(j, "dev_path", errors, false);
  const std::string test_path = string_field(j, "test_path", errors, false);
  const std::string checkpoint_out = string_field(j, "checkpoint_out", errors, true);
  const std::string checkpoint_in = string_field(j, "checkpoint_in", errors, false);
  bool filter_pron = false;
  if (j.contains("filter_pronominal")) {
    if (j.at("filter_pronominal").is_boolean()) {
      filter_pron = j.at("filter_pronominal").get<bool>();
    } else {
      errors.push_back("filter_pronominal must be a boolean");
    }
  }
  double dev_fraction = 0.1;
  if (j.contains("dev_fraction")) {
    if (j.at("dev_fraction").is_number()) {
      dev_fraction = j.at("dev_fraction").get<double>();
      if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
        errors.push_back("dev_fraction must lie in (0, 1)");
      }
    } else {
      errors.push_back("dev_fraction must be a number");
    }
  }
  if (dev_path.empty() && test_path.empty()) {
    errors.push_back("dev_path or test_path is required");
  }
  if (!errors.empty()) throw format_error("config errors: " + join(errors, "; "));

  const Corpus train_corpus = load_filtered(train_path, filter_pron);
  Corpus dev_corpus;
  if (!dev_path.empty()) {
    dev_corpus = load_filtered(dev_path, filter_pron);
  } else {
    dev_corpus = dev_split(load_filtered(test_path, filter_pron), dev_fraction, cfg.seed).first;
    std::cerr << "held out " << dev_corpus.mentions.size() << " of the test mentions for dev\n";
  }

  std::optional<Checkpoint> warm;
  if (!checkpoint_in.empty()) warm = load_checkpoint(checkpoint_in);

  const TrainResult res = train(train_corpus, dev_corpus, cfg, warm ? &*warm : nullptr);
  for (const std::string& line : res.log_lines) std::cout << line << "\n";
  save_checkpoint(res.best, checkpoint_out);
  std::printf("checkpoint written to %s (best epoch %zu, dev micro-F1 %.6f)\n",
              checkpoint_out.c_str(), res.best_epoch, res.best_dev_micro_f1);
  return 0;
}

void print_metrics(const MetricsReport& ev) {
  std::printf("mentions      %zu\n", ev.mentions);
  std::printf("strict        %.6f\n", ev.strict_accuracy);
  std::printf("macro P/R/F1  %.6f / %.6f / %.6f\n", ev.macro_precision, ev.macro_recall,
              ev.macro_f1);
  std::printf("micro P/R/F1  %.6f / %.6f / %.6f\n", ev.micro_precision, ev.micro_recall,
              ev.micro_f1);
}

int cmd_eval(const std::string& ckpt_path, const std::string& corpus_path, bool as_json,
             bool filter_pron, std::size_t typewise) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus c = load_filtered(corpus_path, filter_pron);
  const Predictor predictor(ckpt);
  std::vector<std::vector<std::size_t>> preds;
  preds.reserve(c.mentions.size());
  for (const MentionRecord& m : c.mentions) {
    preds.push_back(predictor.predict_mention(c.sentences[m.sentence], m).labels);
  }
  const auto gold = gold_sets(c, ckpt.hierarchy);
  const MetricsReport ev = evaluate(preds, gold);
  if (as_json) {
    json j{{"mentions", ev.mentions},
           {"strict", ev.strict_accuracy},
           {"macro_precision", ev.macro_precision},
           {"macro_recall", ev.macro_recall},
           {"macro_f1", ev.macro_f1},
           {"micro_precision", ev.micro_precision},
           {"micro_recall", ev.micro_recall},
           {"micro_f1", ev.micro_f1}};
    std::cout << j.dump() << "\n";
  } else {
    print_metrics(ev);
  }
  if (typewise > 0) {
    for (const TypeReportRow& row : typewise_report(preds, gold, typewise)) {
      if (row.label >= ckpt.hierarchy.k()) continue;
      std::printf("%-32s %6zu (%5.1f%%)  P %.4f  R %.4f  F1 %.4f\n",
                  ckpt.hierarchy.label(row.label).c_str(), row.support, row.support_pct,
                  row.precision, row.recall, row.f1);
    }
  }
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& corpus_path,
                const std::string& out_path, bool filter_pron) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus c = load_filtered(corpus_path, filter_pron);
  const Predictor predictor(ckpt);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw io_error("cannot open '" + out_path + "' for writing");
  }
  std::ostream& out = out_path.empty() ? std::cout : file;

  for (const MentionRecord& m : c.mentions) {
    const Prediction p = predictor.predict_mention(c.sentences[m.sentence], m);
    json pred_labels = json::array();
    for (std::size_t idx : p.labels) pred_labels.push_back(ckpt.hierarchy.label(idx));
    json line{{"mention_id", std::to_string(m.line) + ":" + std::to_string(m.ordinal)},
              {"gold", m.labels},
              {"pred", pred_labels},
              {"path_scores", p.path_scores}};
    out << line.dump() << "\n";
  }
  return 0;
}

int cmd_export(const std::string& ckpt_path, const std::string& corpus_path,
               const std::string& split, const std::string& out_path, bool filter_pron) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus c = load_filtered(corpus_path, filter_pron);
  const auto rows = export_features(c, ckpt, split);
  save_feature_export(rows, out_path);
  std::cout << "wrote " << rows.size() << " feature vectors to " << out_path << "\n";
  return 0;
}

int cmd_gradcheck(const TrainConfig& cfg, const std::string& corrupt) {
  const GradCheckReport rep = gradient_check(cfg, corrupt);
  if (rep.passed) {
    std::cout << rep.summary() << "\n";
    return 0;
  }
  std::cerr << rep.summary() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fine-grained entity type classifier over noisy distant supervision"};
  app.require_subcommand(1);

  auto* stats = app.add_subcommand("stats", "corpus summary: types, cleanliness, POS coverage");
  std::string stats_corpus;
  bool stats_json = false;
  stats->add_option("corpus", stats_corpus, "JSON-lines corpus file")->required();
  stats->add_flag("--json", stats_json, "machine-readable output");

  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  SynthArgs sa;
  synth->add_option("--out", sa.out, "output corpus path")->required();
  synth->add_option("--depth", sa.spec.depth, "tree depth (default 2)");
  synth->add_option("--branching", sa.spec.branching, "children per node (default 2)");
  synth->add_option("--mentions", sa.spec.n_mentions, "mention count (default 100)");
  synth->add_option("--noise", sa.spec.noise_rate, "fraction of ambiguous entities (default 0)");
  synth->add_option("--seed", sa.spec.seed, "generator seed (default 0)");
  synth->add_option("--entities", sa.spec.n_entities, "entity count (default mentions/50, min 10)");
  synth->add_option("--eval-out", sa.eval_out, "also write a noise-free corpus over the same entities");
  synth->add_option("--eval-mentions", sa.eval_mentions, "eval corpus size (default mentions/5)");

  auto* train_cmd = app.add_subcommand("train", "train a model from a JSON config");
  std::string train_config;
  train_cmd->add_option("--config", train_config, "JSON config file")->required();

  auto* eval_cmd = app.add_subcommand("eval", "score a corpus against a checkpoint");
  std::string eval_ckpt, eval_corpus;
  bool eval_json = false, eval_pron = false;
  std::size_t eval_typewise = 0;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "JSON-lines corpus file")->required();
  eval_cmd->add_flag("--json", eval_json, "machine-readable output");
  eval_cmd->add_flag("--filter-pronominal", eval_pron, "drop pronoun-only mentions first");
  eval_cmd->add_option("--typewise", eval_typewise, "also report the N most frequent types");

  auto* predict = app.add_subcommand("predict", "emit per-mention label paths with scores");
  std::string pr_ckpt, pr_corpus, pr_out;
  bool pr_pron = false;
  predict->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
  predict->add_option("--corpus", pr_corpus, "JSON-lines corpus file")->required();
  predict->add_option("--out", pr_out, "output path (default stdout)");
  predict->add_flag("--filter-pronominal", pr_pron, "drop pronoun-only mentions first");

  auto* exp = app.add_subcommand("export-features", "frozen-encoder vectors for another learner");
  std::string ex_ckpt, ex_corpus, ex_split = "train", ex_out;
  bool ex_pron = false;
  exp->add_option("--checkpoint", ex_ckpt, "model checkpoint")->required();
  exp->add_option("--corpus", ex_corpus, "JSON-lines corpus file")->required();
  exp->add_option("--split", ex_split, "split tag stored with each row (default train)");
  exp->add_option("--out", ex_out, "output path")->required();
  exp->add_flag("--filter-pronominal", ex_pron, "drop pronoun-only mentions first");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference audit of the reverse pass");
  TrainConfig gc_cfg;
  gc_cfg.dims = {4, 6, 3, 4, 5};
  gc_cfg.dropout_p = 0.0;
  std::string gc_mode = "full", gc_corrupt;
  gc->add_option("--d-char", gc_cfg.dims.d_char, "char embedding dim (default 4)");
  gc->add_option("--d-word", gc_cfg.dims.d_word, "word embedding dim (default 6)");
  gc->add_option("--h-word", gc_cfg.dims.h_word, "context LSTM dim (default 3)");
  gc->add_option("--d-m", gc_cfg.dims.d_m, "mention encoder dim (default 4)");
  gc->add_option("--d-e", gc_cfg.dims.d_e, "label embedding dim (default 5)");
  gc->add_option("--seed", gc_cfg.seed, "init seed (default 1)");
  gc->add_option("--dropout", gc_cfg.dropout_p, "dropout rate with fixed masks (default 0)");
  gc->add_option("--mode", gc_mode, "full | all-clean | no-mention");
  gc->add_option("--corrupt", gc_corrupt, "perturb this tensor's gradient (expect failure)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*stats) return cmd_stats(stats_corpus, stats_json);
    if (*synth) return cmd_synth(sa);
    if (*train_cmd) return cmd_train(train_config);
    if (*eval_cmd) return cmd_eval(eval_ckpt, eval_corpus, eval_json, eval_pron, eval_typewise);
    if (*predict) return cmd_predict(pr_ckpt, pr_corpus, pr_out, pr_pron);
    if (*exp) return cmd_export(ex_ckpt, ex_corpus, ex_split, ex_out, ex_pron);
    if (*gc) {
      gc_cfg.mode = mode_from_name(gc_mode);
      return cmd_gradcheck(gc_cfg, gc_corrupt);
    }
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
