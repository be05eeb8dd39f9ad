#include "finetype/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "finetype/adam.hpp"
#include "finetype/inference.hpp"
#include "finetype/scorer.hpp"
#include "finetype/transfer.hpp"

namespace finetype {

namespace {

struct TrainItem {
  std::vector<std::size_t> chars;
  ContextIndices ctx;
  LabelSplit split;
  bool clean = true;
};

struct DevItem {
  std::vector<std::size_t> chars;
  ContextIndices ctx;
  std::vector<std::size_t> gold;  // sorted; entries >= K are labels the model cannot emit
};

void require_filtered(const MentionRecord& m, const char* tag) {
  if (m.labels.empty() || m.start >= m.end) {
    throw std::invalid_argument(std::string(tag) +
                                ": corpus has unlabeled or zero-length mentions (line " +
                                std::to_string(m.line) + "); run filter_invalid first");
  }
}

std::vector<TrainItem> prepare_train(const Corpus& c, const CharVocab& vc, const TokenVocab& vt,
                                     FeatureVariant variant) {
  std::vector<TrainItem> out;
  out.reserve(c.mentions.size());
  for (const MentionRecord& m : c.mentions) {
    require_filtered(m, "train");
    const Sentence& s = c.sentences[m.sentence];
    TrainItem item;
    if (variant == FeatureVariant::full) item.chars = mention_char_sequence(s, m, vc);
    item.ctx = context_token_indices(s, m, vt);
    item.split = LabelSplit::from_label_vector(m.label_vector);
    item.clean = m.is_clean;
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<DevItem> prepare_dev(const Corpus& c, const TypeHierarchy& h, const CharVocab& vc,
                                 const TokenVocab& vt, FeatureVariant variant) {
  std::vector<DevItem> out;
  out.reserve(c.mentions.size());
  // Gold labels outside the training hierarchy still count toward recall
  // denominators; they get stable indices past K so they can never match.
  std::map<std::string, std::size_t> unknown;
  for (const MentionRecord& m : c.mentions) {
    require_filtered(m, "dev");
    const Sentence& s = c.sentences[m.sentence];
    DevItem item;
    if (variant == FeatureVariant::full) item.chars = mention_char_sequence(s, m, vc);
    item.ctx = context_token_indices(s, m, vt);
    for (const std::string& path : m.labels) {
      if (h.contains(path)) {
        item.gold.push_back(h.index_of(path));
      } else {
        auto [it, inserted] = unknown.try_emplace(path, h.k() + unknown.size());
        item.gold.push_back(it->second);
      }
    }
    std::sort(item.gold.begin(), item.gold.end());
    out.push_back(std::move(item));
  }
  return out;
}

Tensor score_item(const ModelParams& p, const std::vector<std::size_t>& chars,
                  const ContextIndices& ctx, FeatureVariant variant) {
  Tape t;
  ModelVars v = bind_model(t, p);
  Var f = feature_vector(t, v.encoder, chars, ctx, variant);
  return t.value(scores_from_feature(t, f, v.U, v.V));
}

}  // namespace

TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus, const TrainConfig& cfg,
                  const Checkpoint* warm) {
  cfg.validate();
  if (train_corpus.mentions.empty()) throw std::invalid_argument("train: no training mentions");

  const TypeHierarchy& h = train_corpus.hierarchy;
  CharVocab vc = CharVocab::build(train_corpus);
  TokenVocab vt = TokenVocab::build(train_corpus, cfg.lowercase_tokens);
  const FeatureVariant variant = variant_for(cfg.mode);

  Rng rng(cfg.seed);
  ModelParams params = warm ? warm_start(*warm, cfg, h, vc, vt, rng)
                            : ModelParams::init(cfg.dims, vc.size(), vt.size(), h.k(), variant, rng);
  if (!cfg.embeddings_path.empty()) {
    load_pretrained_embeddings(cfg.embeddings_path, vt, params.encoder.word_embed);
  }

  const std::vector<TrainItem> items = prepare_train(train_corpus, vc, vt, variant);
  const std::vector<DevItem> dev = prepare_dev(dev_corpus, h, vc, vt, variant);
  std::vector<std::vector<std::size_t>> dev_gold;
  dev_gold.reserve(dev.size());
  for (const DevItem& d : dev) dev_gold.push_back(d.gold);

  AdamState adam;
  auto named = params.named();

  TrainResult res;
  double best = -1.0;
  ModelParams best_params = params;

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      Tape t;
      ModelVars v = bind_model(t, params, cfg.freeze_word_embed);
      std::vector<ScoredMention> batch;
      batch.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const TrainItem& item = items[order[k]];
        DropoutMasks masks =
            DropoutMasks::draw(cfg.dropout_p, cfg.dims.d_m, cfg.dims.h_word, rng);
        Var f = feature_vector(t, v.encoder, item.chars, item.ctx, variant, &masks);
        batch.push_back({scores_from_feature(t, f, v.U, v.V), &item.split, item.clean});
      }
      Var obj = joint_objective(t, batch, cfg.mode);
      const double value = t.value(obj).at(0);
      if (!std::isfinite(value)) {
        throw std::runtime_error("training diverged: non-finite objective at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index));
      }
      total += value;
      GradientMap grads = t.backward(obj);
      adam.step(named, grads, cfg.learning_rate);
    }

    std::vector<std::vector<std::size_t>> preds;
    preds.reserve(dev.size());
    for (const DevItem& d : dev) {
      preds.push_back(topdown_decode(score_item(params, d.chars, d.ctx, variant), h).labels);
    }
    const MetricsReport ev = evaluate(preds, dev_gold);

    char line[192];
    std::snprintf(line, sizeof line,
                  "epoch %zu\tobjective %.6f\tdev strict %.6f\tmacro-F1 %.6f\tmicro-F1 %.6f",
                  epoch, total / static_cast<double>(items.size()), ev.strict_accuracy, ev.macro_f1,
                  ev.micro_f1);
    res.log_lines.emplace_back(line);

    if (ev.micro_f1 > best) {
      best = ev.micro_f1;
      best_params = params;
      res.best_epoch = epoch;
    }
  }

  res.best_dev_micro_f1 = best < 0.0 ? 0.0 : best;
  res.best = Checkpoint{kCheckpointFormatVersion, cfg, std::move(vc), std::move(vt), h,
                        std::move(best_params)};
  return res;
}

std::string GradCheckReport::summary() const {
  char buf[256];
  if (passed) {
    std::snprintf(buf, sizeof buf, "gradient check passed: %zu entries, max rel err %.3e (%s[%zu])",
                  entries_checked, max_rel_err, worst_param.c_str(), worst_index);
  } else {
    std::snprintf(buf, sizeof buf,
                  "gradient check FAILED at %s[%zu]: analytic %.9g, finite-difference %.9g, rel "
                  "err %.3e",
                  worst_param.c_str(), worst_index, analytic, numeric, max_rel_err);
  }
  return std::string(buf);
}

GradCheckReport gradient_check(const TrainConfig& cfg, const std::string& corrupt_tensor) {
  static const char* kFixture = R"({"tokens":["Ann","visited","Rome","today"],"pos":["NNP","VBD","NNP","NN"],"mentions":[{"start":0,"end":1,"labels":["/a/b"]}]}
{"tokens":["Bo","likes","Rome"],"pos":["NNP","VBZ","NNP"],"mentions":[{"start":0,"end":1,"labels":["/a/c","/d/e"]}]}
{"tokens":["Cy","met","Ann"],"pos":["NNP","VBD","NNP"],"mentions":[{"start":0,"end":1,"labels":["/d/e"]}]}
)";
  std::istringstream in(kFixture);
  const Corpus c = parse_corpus(in);
  const CharVocab vc = CharVocab::build(c);
  const TokenVocab vt = TokenVocab::build(c, cfg.lowercase_tokens);
  const FeatureVariant variant = variant_for(cfg.mode);

  Rng rng(cfg.seed);
  ModelParams params =
      ModelParams::init(cfg.dims, vc.size(), vt.size(), c.hierarchy.k(), variant, rng);

  struct Item {
    std::vector<std::size_t> chars;
    ContextIndices ctx;
    LabelSplit split;
    bool clean = true;
    DropoutMasks masks;
  };
  std::vector<Item> items;
  for (const MentionRecord& m : c.mentions) {
    const Sentence& s = c.sentences[m.sentence];
    Item item;
    if (variant == FeatureVariant::full) item.chars = mention_char_sequence(s, m, vc);
    item.ctx = context_token_indices(s, m, vt);
    item.split = LabelSplit::from_label_vector(m.label_vector);
    item.clean = m.is_clean;
    item.masks = DropoutMasks::draw(cfg.dropout_p, cfg.dims.d_m, cfg.dims.h_word, rng);
    items.push_back(std::move(item));
  }

  auto build = [&](Tape& t, const ModelParams& p) {
    ModelVars v = bind_model(t, p);
    std::vector<ScoredMention> batch;
    batch.reserve(items.size());
    for (const Item& item : items) {
      Var f = feature_vector(t, v.encoder, item.chars, item.ctx, variant, &item.masks);
      batch.push_back({scores_from_feature(t, f, v.U, v.V), &item.split, item.clean});
    }
    return joint_objective(t, batch, cfg.mode);
  };

  GradientMap grads;
  {
    Tape t;
    grads = t.backward(build(t, params));
  }
  if (!corrupt_tensor.empty()) {
    auto it = grads.find(corrupt_tensor);
    if (it == grads.end()) {
      throw std::invalid_argument("gradient check: unknown tensor '" + corrupt_tensor + "'");
    }
    it->second.at(0) += 1.0;
  }

  const double eps = 1e-5;
  GradCheckReport rep;
  for (auto& [name, tensor] : params.named()) {
    const Tensor& analytic = grads.at(name);
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      const double saved = tensor->at(i);
      tensor->at(i) = saved + eps;
      double up;
      {
        Tape t;
        up = t.value(build(t, params)).at(0);
      }
      tensor->at(i) = saved - eps;
      double down;
      {
        Tape t;
        down = t.value(build(t, params)).at(0);
      }
      tensor->at(i) = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double rel = std::fabs(analytic.at(i) - fd) / std::max(1e-8, std::fabs(fd));
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_param = name;
        rep.worst_index = i;
        rep.analytic = analytic.at(i);
        rep.numeric = fd;
      }
      ++rep.entries_checked;
    }
  }
  rep.passed = rep.max_rel_err < 1e-4;
  if (rep.worst_param.empty() && !params.named().empty()) rep.worst_param = params.named().front().first;
  return rep;
}

}  // namespace finetype
