#include "finetype/model.hpp"

#include "finetype/scorer.hpp"

namespace finetype {

FeatureVariant variant_for(TrainMode mode) {
  return mode == TrainMode::no_mention ? FeatureVariant::no_mention : FeatureVariant::full;
}

ModelParams ModelParams::init(const ModelDims& dims, std::size_t char_vocab_size,
                              std::size_t token_vocab_size, std::size_t k,
                              FeatureVariant variant, Rng& rng) {
  ModelParams p;
  p.encoder.char_embed = glorot(char_vocab_size, dims.d_char, rng);
  p.encoder.word_embed = glorot(token_vocab_size, dims.d_word, rng);
  p.encoder.mention_lstm = LstmParams::init(dims.d_m, dims.d_char, rng);
  p.encoder.left_fwd = LstmParams::init(dims.h_word, dims.d_word, rng);
  p.encoder.left_bwd = LstmParams::init(dims.h_word, dims.d_word, rng);
  p.encoder.right_fwd = LstmParams::init(dims.h_word, dims.d_word, rng);
  p.encoder.right_bwd = LstmParams::init(dims.h_word, dims.d_word, rng);
  p.U = glorot(feature_dim(dims.d_m, dims.h_word, variant), dims.d_e, rng);
  p.V = glorot(k, dims.d_e, rng);
  return p;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
  std::vector<std::pair<std::string, Tensor*>> out = encoder.named();
  out.emplace_back("U", &U);
  out.emplace_back("V", &V);
  return out;
}

bool ModelParams::all_finite() const {
  auto& self = const_cast<ModelParams&>(*this);
  for (const auto& [name, tensor] : self.named()) {
    if (!tensor->all_finite()) return false;
  }
  return true;
}

ModelVars bind_model(Tape& t, const ModelParams& p, bool freeze_word_embed) {
  ModelVars v;
  v.encoder = bind_encoder(t, p.encoder, freeze_word_embed);
  v.U = t.param("U", p.U);
  v.V = t.param("V", p.V);
  return v;
}

Tensor compute_feature(const ModelParams& p, const CharVocab& vc, const TokenVocab& vt,
                       const Sentence& s, const MentionRecord& m, FeatureVariant variant) {
  Tape t;
  EncoderVars v = bind_encoder(t, p.encoder);
  const ContextIndices ctx = context_token_indices(s, m, vt);
  std::vector<std::size_t> chars;
  if (variant == FeatureVariant::full) chars = mention_char_sequence(s, m, vc);
  return t.value(feature_vector(t, v, chars, ctx, variant));
}

Tensor compute_scores(const ModelParams& p, const CharVocab& vc, const TokenVocab& vt,
                      const Sentence& s, const MentionRecord& m, FeatureVariant variant) {
  Tape t;
  ModelVars v = bind_model(t, p);
  const ContextIndices ctx = context_token_indices(s, m, vt);
  std::vector<std::size_t> chars;
  if (variant == FeatureVariant::full) chars = mention_char_sequence(s, m, vc);
  Var f = feature_vector(t, v.encoder, chars, ctx, variant);
  return t.value(scores_from_feature(t, f, v.U, v.V));
}

}  // namespace finetype
