#pragma once

#include <cstdint>

#include "finetype/corpus.hpp"

namespace finetype {

struct SynthSpec {
  std::size_t depth = 2;
  std::size_t branching = 2;
  std::size_t n_mentions = 100;
  double noise_rate = 0.0;    // fraction of entities given one off-path label
  std::uint64_t seed = 0;
  std::size_t n_entities = 0;  // 0 picks max(10, n_mentions / 50)
};

// Seeded corpus over a complete type tree. Each entity belongs to one leaf
// chain (every leaf is covered) and its sentences spell that chain out in
// distinctive context tokens, so the task is learnable. Noise is
// entity-correlated, the way distant supervision from an ambiguous knowledge
// base behaves: round(noise_rate * n_entities) entities carry one spurious
// leaf under a different root, and every mention of such an entity inherits
// the whole spurious chain. The entity-to-leaf assignment depends only on
// the seed and entity count, not on noise_rate, so a noisy train corpus and
// a clean eval corpus generated with the same seed describe the same world.
Corpus synth_corpus(const SynthSpec& spec);

}  // namespace finetype
