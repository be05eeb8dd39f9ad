#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace finetype {

// full: clean loss on clean mentions, noisy loss on the rest.
// all_clean: clean loss everywhere (the assume-everything-clean ablation).
// no_mention: full losses over features without the mention encoder block.
enum class TrainMode { full, all_clean, no_mention };

std::string mode_name(TrainMode m);
TrainMode mode_from_name(const std::string& name);  // throws format_error

struct ModelDims {
  std::size_t d_char = 8;
  std::size_t d_word = 8;
  std::size_t h_word = 8;
  std::size_t d_m = 8;
  std::size_t d_e = 8;

  bool operator==(const ModelDims&) const = default;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  double dropout_p = 0.5;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::full;
  ModelDims dims;
  bool lowercase_tokens = false;
  bool freeze_word_embed = false;
  bool copy_embeddings = true;  // consulted only on warm start
  std::string embeddings_path;  // optional pretrained word vectors

  // Every violated constraint, empty when the config is usable.
  std::vector<std::string> problems() const;
  // Throws format_error listing all problems at once.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json train_config_to_json(const TrainConfig& cfg);
// Reads recognized fields from a flat object; unknown keys are left to the
// caller. Collects field-level complaints instead of stopping at the first.
TrainConfig train_config_from_json(const nlohmann::json& j, std::vector<std::string>& errors);

}  // namespace finetype
