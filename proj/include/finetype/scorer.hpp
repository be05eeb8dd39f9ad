#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "finetype/config.hpp"
#include "finetype/corpus.hpp"
#include "finetype/tape.hpp"

namespace finetype {

// Positive (gold) and negative label indices, each sorted ascending and
// jointly covering [0, K).
struct LabelSplit {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;

  static LabelSplit from_label_vector(const std::vector<std::uint8_t>& label_vector);
};

// e = f^T U. f is [D_f], U is [D_f x D_e].
Var embed_feature(Tape& t, Var f, Var U);

// scores[t] = e . V[t]. V is [K x D_e].
Var score_all(Tape& t, Var e, Var V);

Var scores_from_feature(Tape& t, Var f, Var U, Var V);

// Sum of per-label hinges: positives pushed above +1, negatives below -1.
Var loss_clean(Tape& t, Var scores, const LabelSplit& split);

// Negatives as in loss_clean; of the positives, only the maximum score must
// clear the margin (ties resolve to the lowest label index).
Var loss_noisy(Tape& t, Var scores, const LabelSplit& split);

struct ScoredMention {
  Var scores;
  const LabelSplit* split = nullptr;
  bool is_clean = true;
};

// Sum over the batch: clean loss on clean mentions, noisy loss on the rest;
// all_clean applies the clean loss everywhere. no_mention selects losses
// like full (that ablation changes features, not objectives).
Var joint_objective(Tape& t, std::span<const ScoredMention> batch, TrainMode mode);

}  // namespace finetype
