#include "finetype/transfer.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "finetype/errors.hpp"

namespace finetype {

namespace {

bool is_lstm_tensor(const std::string& name) {
  return name.rfind("mention_lstm.", 0) == 0 || name.rfind("left_lstm.", 0) == 0 ||
         name.rfind("right_lstm.", 0) == 0;
}

void copy_row(const Tensor& src, std::size_t src_row, Tensor& dst, std::size_t dst_row) {
  const std::size_t d = dst.cols();
  for (std::size_t j = 0; j < d; ++j) dst.at(dst_row, j) = src.at(src_row, j);
}

}  // namespace

ModelParams warm_start(const Checkpoint& source, const TrainConfig& cfg,
                       const TypeHierarchy& hierarchy, const CharVocab& chars,
                       const TokenVocab& tokens, Rng& rng) {
  ModelParams fresh = ModelParams::init(cfg.dims, chars.size(), tokens.size(), hierarchy.k(),
                                        variant_for(cfg.mode), rng);

  auto src_named = const_cast<ModelParams&>(source.params).named();
  std::map<std::string, const Tensor*> src(src_named.begin(), src_named.end());

  for (auto& [name, dst] : fresh.named()) {
    if (!is_lstm_tensor(name)) continue;
    const Tensor& s = *src.at(name);
    if (s.shape != dst->shape) {
      throw std::invalid_argument("warm start: tensor " + name + " is " + s.shape_str() +
                                  " in the source checkpoint but " + dst->shape_str() +
                                  " is required");
    }
    dst->data = s.data;
  }

  if (cfg.copy_embeddings) {
    const Tensor& sc = source.params.encoder.char_embed;
    Tensor& dc = fresh.encoder.char_embed;
    if (sc.cols() != dc.cols()) {
      throw std::invalid_argument("warm start: char_embed has dimension " +
                                  std::to_string(sc.cols()) + " in the source checkpoint but " +
                                  std::to_string(dc.cols()) + " is required");
    }
    copy_row(sc, CharVocab::kUnknown, dc, CharVocab::kUnknown);
    for (std::uint32_t cp : chars.entries()) {
      const std::size_t si = source.char_vocab.index_of(cp);
      if (si != CharVocab::kUnknown) copy_row(sc, si, dc, chars.index_of(cp));
    }

    const Tensor& sw = source.params.encoder.word_embed;
    Tensor& dw = fresh.encoder.word_embed;
    if (sw.cols() != dw.cols()) {
      throw std::invalid_argument("warm start: word_embed has dimension " +
                                  std::to_string(sw.cols()) + " in the source checkpoint but " +
                                  std::to_string(dw.cols()) + " is required");
    }
    copy_row(sw, TokenVocab::kUnknown, dw, TokenVocab::kUnknown);
    for (const std::string& token : tokens.entries()) {
      const std::size_t si = source.token_vocab.index_of(token);
      if (si != TokenVocab::kUnknown) copy_row(sw, si, dw, tokens.index_of(token));
    }
  }

  return fresh;
}

std::vector<FeatureExport> export_features(const Corpus& c, const Checkpoint& ckpt,
                                           const std::string& split_tag) {
  std::vector<FeatureExport> out;
  out.reserve(c.mentions.size());
  const FeatureVariant variant = ckpt.variant();
  for (const MentionRecord& m : c.mentions) {
    Tensor f = compute_feature(ckpt.params, ckpt.char_vocab, ckpt.token_vocab,
                               c.sentences[m.sentence], m, variant);
    out.push_back({std::to_string(m.line) + ":" + std::to_string(m.ordinal), split_tag,
                   std::move(f.data)});
  }
  return out;
}

void write_feature_export(std::span<const FeatureExport> rows, std::ostream& out) {
  for (const FeatureExport& r : rows) {
    nlohmann::json j{{"id", r.id}, {"split", r.split}, {"vector", r.values}};
    out << j.dump() << "\n";
  }
}

void save_feature_export(std::span<const FeatureExport> rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  write_feature_export(rows, f);
}

}  // namespace finetype
