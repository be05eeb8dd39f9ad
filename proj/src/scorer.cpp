#include "finetype/scorer.hpp"

#include <stdexcept>

namespace finetype {

LabelSplit LabelSplit::from_label_vector(const std::vector<std::uint8_t>& label_vector) {
  LabelSplit s;
  for (std::size_t i = 0; i < label_vector.size(); ++i) {
    (label_vector[i] ? s.positive : s.negative).push_back(i);
  }
  return s;
}

Var embed_feature(Tape& t, Var f, Var U) { return t.vecmat(f, U); }

Var score_all(Tape& t, Var e, Var V) { return t.matvec(V, e); }

Var scores_from_feature(Tape& t, Var f, Var U, Var V) {
  return score_all(t, embed_feature(t, f, U), V);
}

namespace {

void require_positives(const LabelSplit& split, const char* op) {
  if (split.positive.empty()) {
    throw std::invalid_argument(std::string(op) + ": no positive labels");
  }
}

}  // namespace

Var loss_clean(Tape& t, Var scores, const LabelSplit& split) {
  require_positives(split, "loss_clean");
  const std::size_t k = t.value(scores).size();
  Tensor signs = Tensor::full({k}, -1.0);
  for (std::size_t i : split.positive) signs.data[i] = 1.0;
  // max(0, 1 - y_t * s_t) with y_t = +1 on gold labels, -1 elsewhere
  return t.sum(t.relu(t.affine(t.mul(scores, t.input(std::move(signs))), -1.0, 1.0)));
}

Var loss_noisy(Tape& t, Var scores, const LabelSplit& split) {
  require_positives(split, "loss_noisy");
  Var best = t.max(t.gather(scores, split.positive));
  Var pos_term = t.relu(t.affine(best, -1.0, 1.0));
  if (split.negative.empty()) return pos_term;
  Var neg_term = t.sum(t.relu(t.affine(t.gather(scores, split.negative), 1.0, 1.0)));
  return t.add(neg_term, pos_term);
}

Var joint_objective(Tape& t, std::span<const ScoredMention> batch, TrainMode mode) {
  if (batch.empty()) throw std::invalid_argument("joint_objective: empty batch");
  Var total;
  bool first = true;
  for (const ScoredMention& m : batch) {
    const bool as_clean = mode == TrainMode::all_clean || m.is_clean;
    Var term = as_clean ? loss_clean(t, m.scores, *m.split) : loss_noisy(t, m.scores, *m.split);
    total = first ? term : t.add(total, term);
    first = false;
  }
  return total;
}

}  // namespace finetype
