#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "finetype/checkpoint.hpp"
#include "finetype/corpus.hpp"
#include "finetype/hierarchy.hpp"
#include "finetype/tensor.hpp"

namespace finetype {

// A root-anchored chain of label indices in descent order, with the score of
// each emitted node. Empty when the best depth-1 score is already <= 0.
struct Prediction {
  std::vector<std::size_t> labels;
  std::vector<double> path_scores;

  bool operator==(const Prediction&) const = default;
};

// Greedy top-down search: among the current node's children pick the highest
// score (ties to the lowest index), descend while that score exceeds the
// fixed zero threshold, stop at a leaf or a non-positive best child.
Prediction topdown_decode(const Tensor& scores, const TypeHierarchy& h);

// Scores a feature vector against U/V and decodes it.
Prediction predict(const Tensor& feature, const TypeHierarchy& h, const Tensor& U,
                   const Tensor& V);

// Checkpoint-driven prediction over corpus mentions.
class Predictor {
 public:
  explicit Predictor(const Checkpoint& ckpt);

  Tensor scores(const Sentence& s, const MentionRecord& m) const;
  Prediction predict_mention(const Sentence& s, const MentionRecord& m) const;

 private:
  const Checkpoint& ckpt_;
};

struct MetricsReport {
  double strict_accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  std::size_t mentions = 0;
};

// Label sets as sorted index vectors, aligned one-to-one.
MetricsReport evaluate(const std::vector<std::vector<std::size_t>>& predicted,
                       const std::vector<std::vector<std::size_t>>& gold);

struct TypeReportRow {
  std::size_t label = 0;
  std::size_t support = 0;      // gold mentions carrying the type
  double support_pct = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-type P/R/F1 over mention-type incidence for the top_n most frequent
// gold types (ties to the lower label index).
std::vector<TypeReportRow> typewise_report(const std::vector<std::vector<std::size_t>>& predicted,
                                           const std::vector<std::vector<std::size_t>>& gold,
                                           std::size_t top_n);

}  // namespace finetype
