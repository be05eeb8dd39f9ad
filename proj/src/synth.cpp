#include "finetype/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "finetype/rng.hpp"

namespace finetype {

namespace {

void grow(const std::string& path, const std::string& seg, std::size_t levels_left,
          std::size_t branching, std::vector<std::string>& paths, std::vector<std::string>& leaves) {
  paths.push_back(path);
  if (levels_left == 0) {
    leaves.push_back(path);
    return;
  }
  for (std::size_t j = 0; j < branching; ++j) {
    const std::string child = seg + "_" + std::to_string(j);
    grow(path + "/" + child, child, levels_left - 1, branching, paths, leaves);
  }
}

std::string root_segment(const std::string& path) {
  const std::size_t next = path.find('/', 1);
  return next == std::string::npos ? path : path.substr(0, next);
}

// "/t0/t0_1" -> {"/t0", "/t0/t0_1"}
std::vector<std::string> chain_of(const std::string& leaf) {
  std::vector<std::string> chain;
  std::size_t pos = leaf.find('/', 1);
  while (pos != std::string::npos) {
    chain.push_back(leaf.substr(0, pos));
    pos = leaf.find('/', pos + 1);
  }
  chain.push_back(leaf);
  return chain;
}

std::string signal_token(const std::string& path) {
  std::string token = "k" + path;
  std::replace(token.begin(), token.end(), '/', '_');
  return token;
}

}  // namespace

Corpus synth_corpus(const SynthSpec& spec) {
  if (spec.branching < 2) throw std::invalid_argument("synth: branching must be at least 2");
  if (spec.depth < 1 || spec.depth > 4) throw std::invalid_argument("synth: depth must be 1 to 4");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) {
    throw std::invalid_argument("synth: noise_rate must be in [0, 1)");
  }
  if (spec.n_mentions == 0) throw std::invalid_argument("synth: n_mentions must be positive");

  std::vector<std::string> paths, leaves;
  for (std::size_t r = 0; r < spec.branching; ++r) {
    const std::string seg = "t" + std::to_string(r);
    grow("/" + seg, seg, spec.depth - 1, spec.branching, paths, leaves);
  }

  const std::size_t n_entities =
      spec.n_entities > 0 ? spec.n_entities : std::max<std::size_t>(10, spec.n_mentions / 50);
  if (n_entities < leaves.size()) {
    throw std::invalid_argument("synth: " + std::to_string(n_entities) +
                                " entities cannot cover " + std::to_string(leaves.size()) +
                                " leaf types");
  }

  Rng rng(spec.seed);

  std::vector<std::size_t> leaf_perm(leaves.size());
  std::iota(leaf_perm.begin(), leaf_perm.end(), 0);
  rng.shuffle(leaf_perm);
  std::vector<std::size_t> true_leaf(n_entities);
  for (std::size_t e = 0; e < n_entities; ++e) true_leaf[e] = leaf_perm[e % leaf_perm.size()];

  std::vector<std::size_t> ent_order(n_entities);
  std::iota(ent_order.begin(), ent_order.end(), 0);
  rng.shuffle(ent_order);
  const auto n_noisy = static_cast<std::size_t>(std::llround(spec.noise_rate * n_entities));
  std::vector<std::optional<std::size_t>> spurious(n_entities);
  for (std::size_t k = 0; k < n_noisy; ++k) {
    const std::size_t e = ent_order[k];
    const std::string own_root = root_segment(leaves[true_leaf[e]]);
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < leaves.size(); ++j) {
      if (root_segment(leaves[j]) != own_root) candidates.push_back(j);
    }
    spurious[e] = candidates[rng.uniform_index(candidates.size())];
  }

  static const std::vector<std::string> kFillers = {"the",  "report",  "market", "group", "city",
                                                    "council", "team", "press",  "board", "public"};

  Corpus c;
  c.hierarchy = TypeHierarchy::from_labels(paths);
  c.sentences.reserve(spec.n_mentions);
  c.mentions.reserve(spec.n_mentions);
  for (std::size_t j = 0; j < spec.n_mentions; ++j) {
    const std::size_t e = j < n_entities ? j : rng.uniform_index(n_entities);
    const std::string& leaf = leaves[true_leaf[e]];
    const std::string& f0 = kFillers[rng.uniform_index(kFillers.size())];
    const std::string& f1 = kFillers[rng.uniform_index(kFillers.size())];

    Sentence s;
    s.tokens = {f0, "ent" + std::to_string(e), "is"};
    s.pos_tags = {"DT", "NNP", "VBZ"};
    for (const std::string& node : chain_of(leaf)) {
      s.tokens.push_back(signal_token(node));
      s.pos_tags.emplace_back("NN");
    }
    s.tokens.push_back(f1);
    s.pos_tags.emplace_back("NN");
    s.tokens.push_back(".");
    s.pos_tags.emplace_back(".");

    MentionRecord m;
    m.sentence = j;
    m.start = 1;
    m.end = 2;
    std::vector<std::string> given = {leaf};
    if (spurious[e]) given.push_back(leaves[*spurious[e]]);
    m.labels = normalize_labels(given, c.hierarchy);
    m.label_vector.assign(c.hierarchy.k(), 0);
    for (const std::string& path : m.labels) m.label_vector[c.hierarchy.index_of(path)] = 1;
    m.is_clean = is_clean(m.labels, c.hierarchy);
    m.line = j + 1;
    m.ordinal = 0;

    c.sentences.push_back(std::move(s));
    c.mentions.push_back(std::move(m));
  }
  return c;
}

}  // namespace finetype
