#include "finetype/config.hpp"

#include <sstream>

#include "finetype/errors.hpp"

namespace finetype {

std::string mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::full: return "full";
    case TrainMode::all_clean: return "all-clean";
    case TrainMode::no_mention: return "no-mention";
  }
  return "full";
}

TrainMode mode_from_name(const std::string& name) {
  if (name == "full") return TrainMode::full;
  if (name == "all-clean") return TrainMode::all_clean;
  if (name == "no-mention") return TrainMode::no_mention;
  throw format_error("unknown mode '" + name + "' (expected full, all-clean, or no-mention)");
}

std::vector<std::string> TrainConfig::problems() const {
  std::vector<std::string> out;
  if (!(learning_rate > 0.0)) out.push_back("learning_rate must be > 0");
  if (batch_size < 1) out.push_back("batch_size must be >= 1");
  if (epochs < 1) out.push_back("epochs must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) out.push_back("dropout_p must lie in [0, 1)");
  if (dims.d_char < 1) out.push_back("d_char must be >= 1");
  if (dims.d_word < 1) out.push_back("d_word must be >= 1");
  if (dims.h_word < 1) out.push_back("h_word must be >= 1");
  if (dims.d_m < 1) out.push_back("d_m must be >= 1");
  if (dims.d_e < 1) out.push_back("d_e must be >= 1");
  return out;
}

void TrainConfig::validate() const {
  const std::vector<std::string> bad = problems();
  if (bad.empty()) return;
  std::ostringstream msg;
  msg << "config errors: ";
  for (std::size_t i = 0; i < bad.size(); ++i) {
    if (i) msg << "; ";
    msg << bad[i];
  }
  throw format_error(msg.str());
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["learning_rate"] = cfg.learning_rate;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["dropout_p"] = cfg.dropout_p;
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["d_char"] = cfg.dims.d_char;
  j["d_word"] = cfg.dims.d_word;
  j["h_word"] = cfg.dims.h_word;
  j["d_m"] = cfg.dims.d_m;
  j["d_e"] = cfg.dims.d_e;
  j["lowercase_tokens"] = cfg.lowercase_tokens;
  j["freeze_word_embed"] = cfg.freeze_word_embed;
  j["copy_embeddings"] = cfg.copy_embeddings;
  j["embeddings_path"] = cfg.embeddings_path;
  return j;
}

namespace {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& slot, bool (nlohmann::json::*pred)()
                    const,
                const char* type_name, std::vector<std::string>& errors) {
  if (!j.contains(key)) return;
  const nlohmann::json& v = j.at(key);
  if (!(v.*pred)()) {
    errors.push_back(std::string(key) + " must be " + type_name);
    return;
  }
  slot = v.get<T>();
}

void read_size(const nlohmann::json& j, const char* key, std::size_t& slot,
               std::vector<std::string>& errors) {
  if (!j.contains(key)) return;
  const nlohmann::json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    errors.push_back(std::string(key) + " must be a non-negative integer");
    return;
  }
  slot = v.get<std::size_t>();
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j, std::vector<std::string>& errors) {
  TrainConfig cfg;
  read_field(j, "learning_rate", cfg.learning_rate, &nlohmann::json::is_number, "a number",
             errors);
  read_size(j, "batch_size", cfg.batch_size, errors);
  read_size(j, "epochs", cfg.epochs, errors);
  read_field(j, "dropout_p", cfg.dropout_p, &nlohmann::json::is_number, "a number", errors);
  if (j.contains("seed")) {
    const nlohmann::json& v = j.at("seed");
    if (!v.is_number_integer()) {
      errors.push_back("seed must be an integer");
    } else {
      cfg.seed = v.get<std::uint64_t>();
    }
  }
  if (j.contains("mode")) {
    const nlohmann::json& v = j.at("mode");
    if (!v.is_string()) {
      errors.push_back("mode must be a string");
    } else {
      try {
        cfg.mode = mode_from_name(v.get<std::string>());
      } catch (const format_error& e) {
        errors.push_back(e.what());
      }
    }
  }
  read_size(j, "d_char", cfg.dims.d_char, errors);
  read_size(j, "d_word", cfg.dims.d_word, errors);
  read_size(j, "h_word", cfg.dims.h_word, errors);
  read_size(j, "d_m", cfg.dims.d_m, errors);
  read_size(j, "d_e", cfg.dims.d_e, errors);
  read_field(j, "lowercase_tokens", cfg.lowercase_tokens, &nlohmann::json::is_boolean,
             "a boolean", errors);
  read_field(j, "freeze_word_embed", cfg.freeze_word_embed, &nlohmann::json::is_boolean,
             "a boolean", errors);
  read_field(j, "copy_embeddings", cfg.copy_embeddings, &nlohmann::json::is_boolean, "a boolean",
             errors);
  read_field(j, "embeddings_path", cfg.embeddings_path, &nlohmann::json::is_string, "a string",
             errors);
  for (const std::string& p : cfg.problems()) errors.push_back(p);
  return cfg;
}

}  // namespace finetype
