#include "finetype/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "finetype/errors.hpp"
#include "finetype/text.hpp"

namespace finetype {

using nlohmann::json;

namespace {

json tensor_to_json(const Tensor& t) {
  json j;
  j["shape"] = t.shape;
  j["data"] = t.data;
  return j;
}

Tensor tensor_from_json(const json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw format_error("tensor " + name + " must be {\"shape\", \"data\"}");
  }
  std::vector<std::size_t> shape;
  for (const auto& d : j.at("shape")) {
    if (!d.is_number_integer() || d.get<long long>() < 1) {
      throw format_error("tensor " + name + " has an invalid shape");
    }
    shape.push_back(d.get<std::size_t>());
  }
  Tensor t = Tensor::zeros(shape);
  const json& data = j.at("data");
  if (!data.is_array() || data.size() != t.size()) {
    throw format_error("tensor " + name + " data length does not match its shape");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!data[i].is_number()) throw format_error("tensor " + name + " holds a non-numeric entry");
    t.data[i] = data[i].get<double>();
  }
  return t;
}

// The expected shape of every named tensor, derived from config + vocab
// sizes + K. Also the authority for which names must exist.
std::vector<std::pair<std::string, std::vector<std::size_t>>> expected_shapes(
    const Checkpoint& c) {
  const ModelDims& d = c.config.dims;
  const std::size_t k = c.hierarchy.k();
  const std::size_t d_f = feature_dim(d.d_m, d.h_word, c.variant());
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  out.emplace_back("char_embed", std::vector<std::size_t>{c.char_vocab.size(), d.d_char});
  out.emplace_back("word_embed", std::vector<std::size_t>{c.token_vocab.size(), d.d_word});
  auto lstm = [&out](const std::string& prefix, std::size_t h, std::size_t in) {
    for (const char* g : {"W_i", "W_f", "W_o", "W_g"}) {
      out.emplace_back(prefix + "." + g, std::vector<std::size_t>{h, in});
    }
    for (const char* g : {"R_i", "R_f", "R_o", "R_g"}) {
      out.emplace_back(prefix + "." + g, std::vector<std::size_t>{h, h});
    }
    for (const char* g : {"b_i", "b_f", "b_o", "b_g"}) {
      out.emplace_back(prefix + "." + g, std::vector<std::size_t>{h});
    }
  };
  lstm("mention_lstm", d.d_m, d.d_char);
  lstm("left_lstm.fwd", d.h_word, d.d_word);
  lstm("left_lstm.bwd", d.h_word, d.d_word);
  lstm("right_lstm.fwd", d.h_word, d.d_word);
  lstm("right_lstm.bwd", d.h_word, d.d_word);
  out.emplace_back("U", std::vector<std::size_t>{d_f, d.d_e});
  out.emplace_back("V", std::vector<std::size_t>{k, d.d_e});
  return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  json j;
  j["format_version"] = c.format_version;
  j["config"] = train_config_to_json(c.config);
  json chars = json::array();
  for (std::uint32_t cp : c.char_vocab.entries()) chars.push_back(utf8_encode(cp));
  j["char_vocab"] = std::move(chars);
  j["token_vocab"]["lowercase"] = c.token_vocab.lowercase();
  j["token_vocab"]["entries"] = c.token_vocab.entries();
  j["hierarchy"] = c.hierarchy.labels();
  json tensors;
  auto& params = const_cast<ModelParams&>(c.params);
  for (const auto& [name, tensor] : params.named()) {
    tensors[name] = tensor_to_json(*tensor);
  }
  j["tensors"] = std::move(tensors);

  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f << j.dump(1) << '\n';
  if (!f) throw io_error("failed writing checkpoint to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open checkpoint file '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw format_error("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw format_error("checkpoint must be a JSON object");
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer()) {
    throw format_error("checkpoint missing format_version");
  }
  Checkpoint c;
  c.format_version = j.at("format_version").get<int>();
  if (c.format_version != kCheckpointFormatVersion) {
    throw format_error("unsupported checkpoint format_version " +
                       std::to_string(c.format_version) + " (expected " +
                       std::to_string(kCheckpointFormatVersion) + ")");
  }
  for (const char* key : {"config", "char_vocab", "token_vocab", "hierarchy", "tensors"}) {
    if (!j.contains(key)) throw format_error(std::string("checkpoint missing \"") + key + "\"");
  }

  std::vector<std::string> config_errors;
  c.config = train_config_from_json(j.at("config"), config_errors);
  if (!config_errors.empty()) {
    throw format_error("checkpoint config invalid: " + config_errors.front());
  }

  std::vector<std::uint32_t> chars;
  for (const auto& e : j.at("char_vocab")) {
    if (!e.is_string()) throw format_error("char_vocab entries must be strings");
    const auto cps = utf8_decode(e.get<std::string>());
    if (cps.size() != 1) throw format_error("char_vocab entries must be single characters");
    chars.push_back(cps[0]);
  }
  c.char_vocab = CharVocab::from_entries(std::move(chars));

  const json& tv = j.at("token_vocab");
  if (!tv.is_object() || !tv.contains("lowercase") || !tv.contains("entries")) {
    throw format_error("token_vocab must be {\"lowercase\", \"entries\"}");
  }
  c.token_vocab = TokenVocab::from_entries(tv.at("entries").get<std::vector<std::string>>(),
                                           tv.at("lowercase").get<bool>());

  c.hierarchy = TypeHierarchy::from_labels(j.at("hierarchy").get<std::vector<std::string>>());

  const json& tensors = j.at("tensors");
  std::map<std::string, Tensor> loaded;
  for (const auto& [name, shape] : expected_shapes(c)) {
    if (!tensors.contains(name)) throw format_error("missing tensor " + name);
    Tensor t = tensor_from_json(tensors.at(name), name);
    if (t.shape != shape) {
      throw format_error("tensor " + name + " has shape " + t.shape_str() + ", expected " +
                         Tensor::zeros(shape).shape_str());
    }
    loaded.emplace(name, std::move(t));
  }
  for (auto& [name, slot] : c.params.named()) {
    *slot = std::move(loaded.at(name));
  }
  return c;
}

}  // namespace finetype
