#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "finetype/adam.hpp"
#include "finetype/checkpoint.hpp"
#include "finetype/errors.hpp"
#include "finetype/inference.hpp"
#include "finetype/scorer.hpp"
#include "finetype/synth.hpp"
#include "finetype/trainer.hpp"
#include "finetype/transfer.hpp"
#include "support.hpp"

using namespace finetype;

namespace {

SynthSpec tiny_spec() {
  SynthSpec spec;
  spec.depth = 2;
  spec.branching = 2;
  spec.n_mentions = 48;
  spec.noise_rate = 0.0;
  spec.seed = 9;
  spec.n_entities = 8;
  return spec;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.dims = {5, 6, 4, 4, 5};
  cfg.learning_rate = 5e-3;
  cfg.batch_size = 16;
  cfg.epochs = 6;
  cfg.dropout_p = 0.0;
  cfg.seed = 2;
  return cfg;
}

double objective_of(const std::string& log_line) {
  std::size_t epoch = 0;
  double objective = 0.0;
  REQUIRE(std::sscanf(log_line.c_str(), "epoch %zu\tobjective %lf", &epoch, &objective) == 2);
  return objective;
}

double micro_of(const std::string& log_line) {
  const std::string key = "micro-F1 ";
  const std::size_t pos = log_line.rfind(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(log_line.substr(pos + key.size()));
}

std::vector<std::vector<std::size_t>> gold_of(const Corpus& c) {
  std::vector<std::vector<std::size_t>> gold;
  for (const MentionRecord& m : c.mentions) {
    std::vector<std::size_t> g;
    for (std::size_t i = 0; i < m.label_vector.size(); ++i) {
      if (m.label_vector[i]) g.push_back(i);
    }
    gold.push_back(std::move(g));
  }
  return gold;
}

MetricsReport eval_checkpoint(const Checkpoint& ckpt, const Corpus& c) {
  const Predictor predictor(ckpt);
  std::vector<std::vector<std::size_t>> preds;
  for (const MentionRecord& m : c.mentions) {
    preds.push_back(predictor.predict_mention(c.sentences[m.sentence], m).labels);
  }
  return evaluate(preds, gold_of(c));
}

}  // namespace

TEST_CASE("adam implements the bias-corrected update") {
  SUBCASE("zero gradient leaves parameters untouched") {
    Tensor p = Tensor::vec({0.7, -0.3});
    AdamState adam;
    GradientMap grads;
    grads["p"] = Tensor::zeros({2});
    adam.step({{"p", &p}}, grads, 1e-3);
    CHECK(p.at(0) == 0.7);
    CHECK(p.at(1) == -0.3);
    CHECK(adam.steps_taken() == 1);
  }

  SUBCASE("first step with unit gradient moves by about minus lr") {
    Tensor p = Tensor::vec({0.5});
    AdamState adam;
    GradientMap grads;
    grads["p"] = Tensor::vec({1.0});
    adam.step({{"p", &p}}, grads, 1e-3);
    // m-hat = v-hat = 1 at t=1, so the step is lr/(1+eps)
    CHECK(std::abs(p.at(0) - (0.5 - 1e-3)) < 1e-10);
  }

  SUBCASE("successive identical calls produce different steps") {
    Tensor p = Tensor::vec({0.0});
    AdamState adam;
    GradientMap grads;
    grads["p"] = Tensor::vec({1.0});
    adam.step({{"p", &p}}, grads, 1e-3);
    const double first = -p.at(0);
    const double before = p.at(0);
    adam.step({{"p", &p}}, grads, 1e-3);
    const double second = before - p.at(0);
    CHECK(first != second);
    CHECK(adam.steps_taken() == 2);
  }

  SUBCASE("parameters missing from the gradient map stay frozen") {
    Tensor p = Tensor::vec({1.0});
    Tensor q = Tensor::vec({2.0});
    AdamState adam;
    GradientMap grads;
    grads["p"] = Tensor::vec({1.0});
    adam.step({{"p", &p}, {"q", &q}}, grads, 1e-3);
    CHECK(p.at(0) != 1.0);
    CHECK(q.at(0) == 2.0);
  }
}

TEST_CASE("gradient check passes on the built-in fixture") {
  TrainConfig cfg;
  cfg.dims = {4, 6, 3, 4, 5};
  cfg.dropout_p = 0.0;
  cfg.seed = 1;

  const GradCheckReport rep = gradient_check(cfg);
  CHECK(rep.passed);
  CHECK(rep.max_rel_err < 1e-4);
  CHECK(rep.entries_checked > 500);
  CHECK(rep.summary().find("passed") != std::string::npos);

  SUBCASE("with dropout masks held fixed") {
    cfg.dropout_p = 0.5;
    const GradCheckReport dropped = gradient_check(cfg);
    CHECK(dropped.passed);
  }

  SUBCASE("corrupted gradient fails naming the tensor") {
    const GradCheckReport bad = gradient_check(cfg, "U");
    CHECK_FALSE(bad.passed);
    CHECK(bad.worst_param == "U");
    CHECK(bad.summary().find("U[") != std::string::npos);
    CHECK(bad.summary().find("FAILED") != std::string::npos);
  }

  SUBCASE("unknown corrupt target is rejected") {
    CHECK_THROWS_AS(gradient_check(cfg, "nonsense"), std::invalid_argument);
  }
}

TEST_CASE("gradients exist and match at the all-zero point") {
  Rng rng(3);
  ModelParams params = ModelParams::init({3, 4, 2, 3, 3}, 5, 6, 4, FeatureVariant::full, rng);
  for (auto& [name, tensor] : params.named()) {
    for (double& v : tensor->data) v = 0.0;
  }
  const std::vector<std::size_t> chars = {1, 2};
  const ContextIndices ctx{{1, 2}, {2, 3}};
  LabelSplit split;
  split.positive = {0, 2};
  split.negative = {1, 3};

  testsupport::ParamMap pm;
  for (auto& [name, tensor] : params.named()) pm[name] = *tensor;
  auto build = [&](Tape& t, const testsupport::ParamMap& values) {
    ModelParams p = params;
    for (auto& [name, dst] : p.named()) *dst = values.at(name);
    ModelVars v = bind_model(t, p);
    Var f = feature_vector(t, v.encoder, chars, ctx, FeatureVariant::full);
    const std::vector<ScoredMention> batch = {
        {scores_from_feature(t, f, v.U, v.V), &split, true}};
    return joint_objective(t, batch, TrainMode::full);
  };
  const auto report = testsupport::fd_check(pm, build);
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("training is deterministic and selects the best dev epoch") {
  const Corpus corpus = synth_corpus(tiny_spec());
  const TrainConfig cfg = tiny_config();

  const TrainResult a = train(corpus, corpus, cfg);
  const TrainResult b = train(corpus, corpus, cfg);
  CHECK(a.log_lines == b.log_lines);
  REQUIRE(a.log_lines.size() == cfg.epochs);

  double best = 0.0;
  for (const std::string& line : a.log_lines) best = std::max(best, micro_of(line));
  // the log prints six decimals, so compare at that resolution
  CHECK(std::abs(a.best_dev_micro_f1 - best) < 1e-6);
  CHECK(a.best_epoch >= 1);
  CHECK(a.best_epoch <= cfg.epochs);

  // the stored parameters really are the best epoch's parameters
  const MetricsReport ev = eval_checkpoint(a.best, corpus);
  CHECK(ev.micro_f1 == doctest::Approx(a.best_dev_micro_f1).epsilon(1e-9));
}

TEST_CASE("training objective trends downward on the fixture") {
  const Corpus corpus = synth_corpus(tiny_spec());
  TrainConfig cfg = tiny_config();
  cfg.learning_rate = 1e-3;
  cfg.epochs = 20;

  const TrainResult res = train(corpus, corpus, cfg);
  std::vector<double> avg;
  for (std::size_t i = 0; i + 5 <= res.log_lines.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i; j < i + 5; ++j) s += objective_of(res.log_lines[j]);
    avg.push_back(s / 5.0);
  }
  for (std::size_t i = 1; i < avg.size(); ++i) CHECK(avg[i] <= avg[i - 1] + 1e-9);
}

TEST_CASE("full and all-clean modes coincide on an all-clean corpus") {
  const Corpus corpus = synth_corpus(tiny_spec());
  for (const MentionRecord& m : corpus.mentions) REQUIRE(m.is_clean);

  TrainConfig cfg = tiny_config();
  cfg.epochs = 4;
  const TrainResult full_run = train(corpus, corpus, cfg);
  cfg.mode = TrainMode::all_clean;
  const TrainResult clean_run = train(corpus, corpus, cfg);
  CHECK(full_run.log_lines == clean_run.log_lines);
}

TEST_CASE("dropout training stays deterministic") {
  const Corpus corpus = synth_corpus(tiny_spec());
  TrainConfig cfg = tiny_config();
  cfg.dropout_p = 0.5;
  cfg.epochs = 3;
  const TrainResult a = train(corpus, corpus, cfg);
  const TrainResult b = train(corpus, corpus, cfg);
  CHECK(a.log_lines == b.log_lines);
}

TEST_CASE("training rejects bad inputs") {
  const Corpus corpus = synth_corpus(tiny_spec());
  TrainConfig cfg = tiny_config();

  SUBCASE("empty corpus") {
    Corpus empty;
    empty.hierarchy = corpus.hierarchy;
    CHECK_THROWS_AS(train(empty, corpus, cfg), std::invalid_argument);
  }

  SUBCASE("config problems are all reported at once") {
    cfg.learning_rate = 0.0;
    cfg.batch_size = 0;
    try {
      train(corpus, corpus, cfg);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("learning_rate") != std::string::npos);
      CHECK(msg.find("batch_size") != std::string::npos);
    }
  }

  SUBCASE("unfiltered mentions are refused") {
    Corpus broken = corpus;
    broken.mentions[0].labels.clear();
    try {
      train(broken, corpus, cfg);
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("filter_invalid") != std::string::npos);
    }
  }
}

TEST_CASE("poisoned warm-start weights cannot blow up the objective") {
  // the gates saturate and the hinges clamp, so a NaN planted in an LSTM
  // weight is contained: every logged objective stays finite and training
  // runs to completion instead of tripping the divergence abort
  const Corpus corpus = synth_corpus(tiny_spec());
  TrainConfig cfg = tiny_config();
  cfg.epochs = 2;

  Checkpoint source;
  source.config = cfg;
  source.char_vocab = CharVocab::build(corpus);
  source.token_vocab = TokenVocab::build(corpus, false);
  source.hierarchy = corpus.hierarchy;
  Rng rng(4);
  source.params = ModelParams::init(cfg.dims, source.char_vocab.size(), source.token_vocab.size(),
                                    source.hierarchy.k(), FeatureVariant::full, rng);
  source.params.encoder.left_fwd.W_i.at(0, 0) = std::nan("");

  const TrainResult res = train(corpus, corpus, cfg, &source);
  REQUIRE(res.log_lines.size() == cfg.epochs);
  for (const std::string& line : res.log_lines) {
    CHECK(std::isfinite(objective_of(line)));
  }
}

TEST_CASE("warm-started training uses the copied weights") {
  const Corpus corpus = synth_corpus(tiny_spec());
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;

  const TrainResult cold = train(corpus, corpus, cfg);
  const TrainResult warm = train(corpus, corpus, cfg, &cold.best);
  REQUIRE(warm.log_lines.size() == 3);
  // first-epoch objective must differ: the encoder starts from trained weights
  CHECK(objective_of(warm.log_lines[0]) != objective_of(cold.log_lines[0]));
}

TEST_CASE("checkpoints round-trip byte-identically and preserve metrics") {
  const Corpus corpus = synth_corpus(tiny_spec());
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;
  const TrainResult res = train(corpus, corpus, cfg);

  const std::string path = "/tmp/finetype_test_ckpt.json";
  const std::string path2 = "/tmp/finetype_test_ckpt2.json";
  save_checkpoint(res.best, path);
  const Checkpoint loaded = load_checkpoint(path);
  save_checkpoint(loaded, path2);

  std::ifstream f1(path), f2(path2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());
  CHECK(!s1.str().empty());

  auto originals = const_cast<ModelParams&>(res.best.params).named();
  auto restored = const_cast<ModelParams&>(loaded.params).named();
  REQUIRE(originals.size() == restored.size());
  for (std::size_t i = 0; i < originals.size(); ++i) {
    CHECK(originals[i].first == restored[i].first);
    CHECK(originals[i].second->shape == restored[i].second->shape);
    CHECK(originals[i].second->data == restored[i].second->data);
  }
  CHECK(loaded.char_vocab == res.best.char_vocab);
  CHECK(loaded.token_vocab == res.best.token_vocab);
  CHECK(loaded.hierarchy == res.best.hierarchy);
  CHECK(loaded.config == res.best.config);

  const MetricsReport before = eval_checkpoint(res.best, corpus);
  const MetricsReport after = eval_checkpoint(loaded, corpus);
  CHECK(before.strict_accuracy == after.strict_accuracy);
  CHECK(before.macro_f1 == after.macro_f1);
  CHECK(before.micro_f1 == after.micro_f1);

  SUBCASE("missing tensors are named") {
    nlohmann::json j;
    {
      std::ifstream in(path);
      in >> j;
    }
    j.at("tensors").erase("U");
    {
      std::ofstream out(path);
      out << j.dump(1);
    }
    try {
      load_checkpoint(path);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      CHECK(std::string(e.what()).find("missing tensor U") != std::string::npos);
    }
  }

  SUBCASE("future format versions are refused") {
    nlohmann::json j;
    {
      std::ifstream in(path);
      in >> j;
    }
    j["format_version"] = 2;
    {
      std::ofstream out(path);
      out << j.dump(1);
    }
    CHECK_THROWS_AS(load_checkpoint(path), format_error);
  }

  SUBCASE("shape drift is refused") {
    nlohmann::json j;
    {
      std::ifstream in(path);
      in >> j;
    }
    j.at("tensors").at("V").at("shape")[0] = 99;
    {
      std::ofstream out(path);
      out << j.dump(1);
    }
    CHECK_THROWS_AS(load_checkpoint(path), format_error);
  }

  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("train config serializes and validates by field") {
  TrainConfig cfg = tiny_config();
  cfg.mode = TrainMode::no_mention;
  cfg.lowercase_tokens = true;
  const nlohmann::json j = train_config_to_json(cfg);
  std::vector<std::string> errors;
  const TrainConfig back = train_config_from_json(j, errors);
  CHECK(errors.empty());
  CHECK(back == cfg);

  nlohmann::json bad = j;
  bad["mode"] = "mysterious";
  bad["learning_rate"] = -1.0;
  bad["batch_size"] = "many";
  errors.clear();
  train_config_from_json(bad, errors);
  CHECK(errors.size() >= 3);
}
