#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "finetype/checkpoint.hpp"
#include "finetype/corpus.hpp"

namespace finetype {

// Fresh parameters for a new task that reuse the source encoder: every LSTM
// tensor is copied verbatim (shapes must match), embedding rows are copied
// for vocabulary entries shared with the source when cfg.copy_embeddings is
// set, and U/V are always freshly initialized for the new label set. Draws
// from rng exactly as a cold ModelParams::init would.
ModelParams warm_start(const Checkpoint& source, const TrainConfig& cfg,
                       const TypeHierarchy& hierarchy, const CharVocab& chars,
                       const TokenVocab& tokens, Rng& rng);

struct FeatureExport {
  std::string id;  // "line:ordinal" from the mention's provenance
  std::string split;
  std::vector<double> values;
};

// Frozen-encoder feature vectors for every mention, in corpus order.
std::vector<FeatureExport> export_features(const Corpus& c, const Checkpoint& ckpt,
                                           const std::string& split_tag);

// JSON lines {"id", "split", "vector"}.
void write_feature_export(std::span<const FeatureExport> rows, std::ostream& out);
void save_feature_export(std::span<const FeatureExport> rows, const std::string& path);

}  // namespace finetype
