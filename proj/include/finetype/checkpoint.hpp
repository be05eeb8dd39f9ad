#pragma once

#include <string>
#include <vector>

#include "finetype/config.hpp"
#include "finetype/hierarchy.hpp"
#include "finetype/model.hpp"
#include "finetype/vocab.hpp"

namespace finetype {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  TrainConfig config;
  CharVocab char_vocab;
  TokenVocab token_vocab;
  TypeHierarchy hierarchy;
  ModelParams params;

  FeatureVariant variant() const { return variant_for(config.mode); }
};

// JSON document with sorted keys and round-trip double formatting, so
// save -> load -> save is byte-identical.
void save_checkpoint(const Checkpoint& c, const std::string& path);

// Validates format_version, tensor presence, and every tensor's shape
// against the stored config, vocabularies, and hierarchy.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace finetype
