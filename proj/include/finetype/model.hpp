#pragma once

#include <string>
#include <utility>
#include <vector>

#include "finetype/config.hpp"
#include "finetype/encoder.hpp"
#include "finetype/tensor.hpp"
#include "finetype/vocab.hpp"

namespace finetype {

// Every learnable tensor. Enumeration (and initialization draw) order is
// fixed: encoder tensors first, then U, then V.
struct ModelParams {
  EncoderParams encoder;
  Tensor U;  // [D_f x D_e]
  Tensor V;  // [K x D_e]

  static ModelParams init(const ModelDims& dims, std::size_t char_vocab_size,
                          std::size_t token_vocab_size, std::size_t k, FeatureVariant variant,
                          Rng& rng);

  std::vector<std::pair<std::string, Tensor*>> named();

  bool all_finite() const;
};

FeatureVariant variant_for(TrainMode mode);

struct ModelVars {
  EncoderVars encoder;
  Var U, V;
};

ModelVars bind_model(Tape& t, const ModelParams& p, bool freeze_word_embed = false);

// Forward-only feature computation for one mention (no dropout).
Tensor compute_feature(const ModelParams& p, const CharVocab& vc, const TokenVocab& vt,
                       const Sentence& s, const MentionRecord& m, FeatureVariant variant);

// Forward-only label scores for one mention.
Tensor compute_scores(const ModelParams& p, const CharVocab& vc, const TokenVocab& vt,
                      const Sentence& s, const MentionRecord& m, FeatureVariant variant);

}  // namespace finetype
