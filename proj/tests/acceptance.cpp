// Release gate: nine checks, one [PASS]/[FAIL] line each, nonzero exit if
// any fail. Each check runs in isolation so one failure cannot hide another.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "finetype/checkpoint.hpp"
#include "finetype/corpus.hpp"
#include "finetype/encoder.hpp"
#include "finetype/inference.hpp"
#include "finetype/model.hpp"
#include "finetype/scorer.hpp"
#include "finetype/synth.hpp"
#include "finetype/tape.hpp"
#include "finetype/trainer.hpp"
#include "finetype/transfer.hpp"
#include "support.hpp"

using namespace finetype;
using testsupport::brute_force_chain;
using testsupport::random_label_paths;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void criterion(int n, const std::string& what, const std::function<std::string()>& body) {
  std::string detail;
  bool ok = false;
  try {
    detail = body();
    ok = true;
  } catch (const std::exception& e) {
    detail = e.what();
  }
  std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

double hinge_loss(bool noisy, const std::vector<double>& scores,
                  const std::vector<std::uint8_t>& lv) {
  Tape t;
  Var s = t.input(Tensor::vec(scores));
  const LabelSplit split = LabelSplit::from_label_vector(lv);
  Var out = noisy ? loss_noisy(t, s, split) : loss_clean(t, s, split);
  return t.value(out).at(0);
}

Prediction reference_decode(const Tensor& scores, const TypeHierarchy& h) {
  Prediction p;
  std::vector<std::size_t> candidates = h.roots();
  while (!candidates.empty()) {
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      if (scores.at(a) != scores.at(b)) return scores.at(a) > scores.at(b);
      return a < b;
    });
    const std::size_t pick = candidates.front();
    if (!(scores.at(pick) > 0.0)) break;
    p.labels.push_back(pick);
    p.path_scores.push_back(scores.at(pick));
    candidates = h.children_of(pick);
  }
  return p;
}

Corpus noisy_world(std::uint64_t seed, std::size_t n, double noise) {
  SynthSpec spec;
  spec.depth = 2;
  spec.branching = 2;
  spec.n_mentions = n;
  spec.noise_rate = noise;
  spec.seed = seed;
  spec.n_entities = 40;
  return synth_corpus(spec);
}

MetricsReport eval_on(const Checkpoint& ckpt, const Corpus& c) {
  Predictor pred(ckpt);
  std::vector<std::vector<std::size_t>> predicted, gold;
  for (const MentionRecord& m : c.mentions) {
    const Prediction p = pred.predict_mention(c.sentences[m.sentence], m);
    std::vector<std::size_t> sorted_pred = p.labels;
    std::sort(sorted_pred.begin(), sorted_pred.end());
    predicted.push_back(std::move(sorted_pred));
    std::vector<std::size_t> g;
    for (std::size_t i = 0; i < m.label_vector.size(); ++i) {
      if (m.label_vector[i]) g.push_back(i);
    }
    gold.push_back(std::move(g));
  }
  return evaluate(predicted, gold);
}

}  // namespace

int main() {
  criterion(1, "analytic gradients match central finite differences", [] {
    const auto start = std::chrono::steady_clock::now();
    TrainConfig cfg;
    cfg.dims = {4, 6, 3, 4, 5};
    cfg.seed = 1;
    cfg.dropout_p = 0.0;
    const GradCheckReport plain = gradient_check(cfg);
    require(plain.passed && plain.max_rel_err < 1e-4,
            "no-dropout check failed: " + plain.summary());
    cfg.dropout_p = 0.5;
    const GradCheckReport dropped = gradient_check(cfg);
    require(dropped.passed && dropped.max_rel_err < 1e-4,
            "fixed-mask dropout check failed: " + dropped.summary());
    const double elapsed = seconds_since(start);
    require(elapsed < 60.0, fmt("too slow: %.1fs", elapsed));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu entries, max rel err %.2e, %.1fs",
                  plain.entries_checked + dropped.entries_checked,
                  std::max(plain.max_rel_err, dropped.max_rel_err), elapsed);
    return std::string(buf);
  });

  criterion(2, "hinge losses reproduce the worked values and the noisy bound", [] {
    require(std::abs(hinge_loss(false, {0.5, -0.2, -1.5}, {1, 0, 0}) - 1.3) < 1e-12,
            "clean hinge value drifted");
    require(std::abs(hinge_loss(false, {2.0, -2.0}, {1, 0})) < 1e-12,
            "satisfied margins should cost zero");
    require(std::abs(hinge_loss(false, {0.0, 0.0}, {1, 0}) - 2.0) < 1e-12,
            "zero scores should cost one per label");
    require(std::abs(hinge_loss(true, {0.2, 0.6}, {1, 1}) - 0.4) < 1e-12,
            "noisy hinge value drifted");
    require(std::abs(hinge_loss(true, {0.5, 2.0, -2.0}, {1, 1, 0})) < 1e-12,
            "cleared max positive should cost zero");
    require(std::abs(hinge_loss(true, {0, 0, 0, 0, 0}, {1, 1, 1, 0, 0}) - 3.0) < 1e-12,
            "all-zero noisy value drifted");

    {
      Tape t;
      std::vector<ScoredMention> batch;
      const LabelSplit clean_split = LabelSplit::from_label_vector({1, 0, 0});
      const LabelSplit noisy_split = LabelSplit::from_label_vector({1, 1});
      batch.push_back({t.input(Tensor::vec({0.5, -0.2, -1.5})), &clean_split, true});
      batch.push_back({t.input(Tensor::vec({0.2, 0.6})), &noisy_split, false});
      const double joint = t.value(joint_objective(t, batch, TrainMode::full)).at(0);
      require(std::abs(joint - 1.7) < 1e-12, fmt("joint objective %.15f != 1.7", joint));
    }

    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t k = 1 + rng.uniform_index(8);
      std::vector<double> scores(k);
      for (double& s : scores) s = rng.uniform(-2.0, 2.0);
      std::vector<std::uint8_t> lv(k, 0);
      lv[rng.uniform_index(k)] = 1;
      for (std::size_t i = 0; i < k; ++i) {
        if (rng.bernoulli(0.4)) lv[i] = 1;
      }
      const double lc = hinge_loss(false, scores, lv);
      const double ln = hinge_loss(true, scores, lv);
      require(ln <= lc + 1e-12, "relaxed loss exceeded the strict loss");
      require(ln >= 0.0 && lc >= 0.0, "hinge losses must be non-negative");
    }
    return std::string("worked values to 1e-12, bound held on 1000 draws");
  });

  criterion(3, "chain detection agrees with the pairwise-ancestor oracle", [] {
    Rng rng(77);
    std::size_t done = 0;
    while (done < 1000) {
      const TypeHierarchy h = TypeHierarchy::from_labels(random_label_paths(rng, 20));
      std::vector<std::string> subset;
      for (const std::string& label : h.labels()) {
        if (rng.bernoulli(0.5)) subset.push_back(label);
      }
      if (subset.empty()) continue;
      const std::vector<std::string> closed = normalize_labels(subset, h);
      require(is_clean(closed, h) == brute_force_chain(closed),
              "disagreement on a " + std::to_string(h.k()) + "-node hierarchy");
      ++done;
    }
    return std::string("1000/1000 agreement");
  });

  criterion(4, "top-down decoding matches an independent reference", [] {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
      const TypeHierarchy h = TypeHierarchy::from_labels(random_label_paths(rng, 12));
      Tensor scores = Tensor::zeros({h.k()});
      for (double& s : scores.data) s = rng.uniform(-1.0, 1.0);

      const Prediction got = topdown_decode(scores, h);
      const Prediction want = reference_decode(scores, h);
      require(got == want, "decode mismatch on trial " + std::to_string(trial));

      for (std::size_t i = 0; i < got.labels.size(); ++i) {
        require(got.path_scores[i] == scores.at(got.labels[i]),
                "path score does not echo the node score");
        require(got.path_scores[i] > 0.0, "descended through a non-positive score");
        const auto parent = h.parent_of(got.labels[i]);
        if (i == 0) {
          require(!parent.has_value(), "chain must start at a depth-1 node");
        } else {
          require(parent.has_value() && *parent == got.labels[i - 1],
                  "chain must follow parent links");
        }
      }
    }
    return std::string("200/200 agreement, chain and threshold invariants held");
  });

  criterion(5, "evaluation metrics match hand-computed fixtures", [] {
    const std::vector<std::vector<std::size_t>> pred = {{0, 1}, {2}, {}, {0, 3}, {4}};
    const std::vector<std::vector<std::size_t>> gold = {{0, 1}, {2}, {3}, {3}, {5, 6}};
    const MetricsReport m = evaluate(pred, gold);
    require(std::abs(m.strict_accuracy - 0.4) < 1e-9, "strict accuracy drifted");
    require(std::abs(m.macro_precision - 0.5) < 1e-9, "macro precision drifted");
    require(std::abs(m.macro_recall - 0.6) < 1e-9, "macro recall drifted");
    require(std::abs(m.macro_f1 - 6.0 / 11.0) < 1e-9, "macro F1 drifted");
    require(std::abs(m.micro_precision - 2.0 / 3.0) < 1e-9, "micro precision drifted");
    require(std::abs(m.micro_recall - 4.0 / 7.0) < 1e-9, "micro recall drifted");
    require(std::abs(m.micro_f1 - 8.0 / 13.0) < 1e-9, "micro F1 drifted");

    const MetricsReport two = evaluate({{0}, {0, 1}}, {{0, 1}, {0, 1}});
    require(std::abs(two.micro_f1 - 6.0 / 7.0) < 1e-9, "two-mention micro F1 drifted");
    return std::string("five-mention fixture to 1e-9, micro-F1 6/7 case held");
  });

  criterion(6, "training drives strict accuracy >= 0.95 on a separable corpus", [] {
    const auto start = std::chrono::steady_clock::now();
    SynthSpec spec;
    spec.depth = 2;
    spec.branching = 2;
    spec.n_mentions = 64;
    spec.noise_rate = 0.0;
    spec.seed = 11;
    const Corpus corpus = synth_corpus(spec);

    TrainConfig cfg;
    cfg.dims = {8, 8, 6, 8, 8};
    cfg.learning_rate = 1e-3;
    cfg.batch_size = 32;
    cfg.epochs = 200;
    cfg.dropout_p = 0.0;
    cfg.seed = 7;
    const TrainResult res = train(corpus, corpus, cfg);
    const MetricsReport m = eval_on(res.best, corpus);
    const double elapsed = seconds_since(start);
    require(m.strict_accuracy >= 0.95,
            fmt("training strict accuracy %.4f < 0.95", m.strict_accuracy));
    require(elapsed < 300.0, fmt("too slow: %.1fs", elapsed));
    return fmt("training strict accuracy %.4f, %.1fs", m.strict_accuracy, elapsed);
  });

  criterion(7, "the relaxed loss beats all-clean training under label noise", [] {
    const auto start = std::chrono::steady_clock::now();
    double full_sum = 0.0, clean_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Corpus train_c = noisy_world(seed, 2000, 0.3);
      const Corpus dev_c = noisy_world(seed, 400, 0.0);

      TrainConfig cfg;
      cfg.dims = {6, 6, 4, 6, 6};
      cfg.learning_rate = 5e-3;
      cfg.batch_size = 64;
      cfg.epochs = 6;
      cfg.dropout_p = 0.0;
      cfg.seed = seed;

      cfg.mode = TrainMode::full;
      full_sum += train(train_c, dev_c, cfg).best_dev_micro_f1;
      cfg.mode = TrainMode::all_clean;
      clean_sum += train(train_c, dev_c, cfg).best_dev_micro_f1;
    }
    const double full_mean = full_sum / 5.0;
    const double clean_mean = clean_sum / 5.0;
    const double elapsed = seconds_since(start);
    require(full_mean >= clean_mean,
            fmt("mean dev micro-F1: full %.4f < all-clean %.4f", full_mean, clean_mean));
    require(elapsed < 1800.0, fmt("too slow: %.1fs", elapsed));
    char buf[160];
    std::snprintf(buf, sizeof buf, "mean dev micro-F1 full %.4f vs all-clean %.4f, %.1fs",
                  full_mean, clean_mean, elapsed);
    return std::string(buf);
  });

  criterion(8, "warm starts reuse the encoder and exports mirror it", [] {
    TrainConfig cfg;
    cfg.dims = {4, 5, 3, 4, 4};
    cfg.epochs = 2;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 16;
    cfg.seed = 31;

    // resizing: a 128-label source feeding a 47-label target
    std::vector<std::string> big, small;
    for (int i = 0; i < 128; ++i) big.push_back("/t" + std::to_string(i));
    for (int i = 0; i < 47; ++i) small.push_back("/t" + std::to_string(i));
    Checkpoint source;
    source.config = cfg;
    source.char_vocab = CharVocab::from_entries({'a', 'b'});
    source.token_vocab = TokenVocab::from_entries({"alpha"}, false);
    source.hierarchy = TypeHierarchy::from_labels(big);
    Rng rng(8);
    source.params = ModelParams::init(cfg.dims, source.char_vocab.size(),
                                      source.token_vocab.size(), 128, FeatureVariant::full, rng);
    Rng rng2(9);
    ModelParams resized = warm_start(source, cfg, TypeHierarchy::from_labels(small),
                                           source.char_vocab, source.token_vocab, rng2);
    require(resized.V.rows() == 47, "V was not resized to the target label count");
    auto warm_named = resized.named();
    auto src_named = source.params.named();
    for (std::size_t i = 0; i < warm_named.size(); ++i) {
      if (warm_named[i].first.find("lstm") == std::string::npos) continue;
      require(warm_named[i].second->data == src_named[i].second->data,
              "LSTM tensor " + warm_named[i].first + " was not copied bit-for-bit");
    }

    // end to end: train, warm start a deeper task, train again, export
    SynthSpec src_spec;
    src_spec.n_mentions = 100;
    src_spec.seed = 31;
    const Corpus src_corpus = synth_corpus(src_spec);
    const TrainResult first = train(src_corpus, src_corpus, cfg);

    SynthSpec tgt_spec;
    tgt_spec.depth = 3;
    tgt_spec.n_mentions = 100;
    tgt_spec.seed = 32;
    const Corpus tgt_corpus = synth_corpus(tgt_spec);
    TrainConfig warm_cfg = cfg;
    warm_cfg.seed = 32;
    const TrainResult second = train(tgt_corpus, tgt_corpus, warm_cfg, &first.best);
    require(second.best.params.V.rows() == tgt_corpus.hierarchy.k(),
            "warm-started model has the wrong label count");
    require(second.log_lines.size() == warm_cfg.epochs, "warm training did not finish");

    const Checkpoint& ckpt = second.best;
    const auto rows = export_features(tgt_corpus, ckpt, "train");
    const std::size_t df =
        feature_dim(cfg.dims.d_m, cfg.dims.h_word, variant_for(cfg.mode));
    require(rows.size() == tgt_corpus.mentions.size(), "one export row per mention");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].values.size() == df, "export width must equal the feature dimension");
      const MentionRecord& m = tgt_corpus.mentions[i];
      Tape t;
      EncoderVars v = bind_encoder(t, ckpt.params.encoder);
      const auto chars =
          mention_char_sequence(tgt_corpus.sentences[m.sentence], m, ckpt.char_vocab);
      const auto ctx =
          context_token_indices(tgt_corpus.sentences[m.sentence], m, ckpt.token_vocab);
      const Tensor direct = t.value(feature_vector(t, v, chars, ctx, FeatureVariant::full));
      require(rows[i].values == direct.data, "export row differs from the encoder output");
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "128 -> 47 resize, warm train, %zu exports at width %zu",
                  rows.size(), df);
    return std::string(buf);
  });

  criterion(9, "checkpoints, corpora, and logs survive round trips", [] {
    SynthSpec spec;
    spec.n_mentions = 60;
    spec.noise_rate = 0.2;
    spec.seed = 91;
    const Corpus corpus = synth_corpus(spec);

    TrainConfig cfg;
    cfg.dims = {4, 5, 3, 4, 4};
    cfg.epochs = 3;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 16;
    cfg.seed = 19;
    const TrainResult a = train(corpus, corpus, cfg);
    const TrainResult b = train(corpus, corpus, cfg);
    require(a.log_lines == b.log_lines, "same-seed training logs differ");

    const std::string path = "/tmp/finetype_acceptance_ckpt.json";
    save_checkpoint(a.best, path);
    const Checkpoint loaded = load_checkpoint(path);
    std::filesystem::remove(path);
    const MetricsReport before = eval_on(a.best, corpus);
    const MetricsReport after = eval_on(loaded, corpus);
    require(before.strict_accuracy == after.strict_accuracy &&
                before.macro_precision == after.macro_precision &&
                before.macro_recall == after.macro_recall &&
                before.macro_f1 == after.macro_f1 &&
                before.micro_precision == after.micro_precision &&
                before.micro_recall == after.micro_recall &&
                before.micro_f1 == after.micro_f1,
            "metrics changed across a checkpoint round trip");

    std::ostringstream first;
    serialize_corpus(corpus, first);
    std::istringstream back(first.str());
    const Corpus reparsed = parse_corpus(back);
    require(reparsed == corpus, "corpus changed across a serialize/parse round trip");
    std::ostringstream second;
    serialize_corpus(reparsed, second);
    require(first.str() == second.str(), "corpus serialization is not stable");
    return std::string("identical logs, metrics, and corpus bytes");
  });

  std::printf("%s: %d of 9 criteria failed\n", g_failures ? "FAIL" : "OK", g_failures);
  return g_failures ? 1 : 0;
}
