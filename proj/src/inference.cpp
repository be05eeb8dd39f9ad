#include "finetype/inference.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace finetype {

Prediction topdown_decode(const Tensor& scores, const TypeHierarchy& h) {
  if (scores.rank() != 1 || scores.size() != h.k()) {
    throw std::invalid_argument("topdown_decode: expected " + std::to_string(h.k()) +
                                " scores, got " + scores.shape_str());
  }
  Prediction out;
  const std::vector<std::size_t>* candidates = &h.roots();
  while (!candidates->empty()) {
    std::size_t best = (*candidates)[0];
    for (std::size_t c : *candidates) {
      if (scores.data[c] > scores.data[best]) best = c;
    }
    if (!(scores.data[best] > 0.0)) break;
    out.labels.push_back(best);
    out.path_scores.push_back(scores.data[best]);
    candidates = &h.children_of(best);
  }
  return out;
}

Prediction predict(const Tensor& feature, const TypeHierarchy& h, const Tensor& U,
                   const Tensor& V) {
  if (feature.rank() != 1 || U.rank() != 2 || feature.size() != U.rows()) {
    throw std::invalid_argument("predict: feature " + feature.shape_str() +
                                " does not match U " + U.shape_str());
  }
  if (V.rank() != 2 || V.cols() != U.cols() || V.rows() != h.k()) {
    throw std::invalid_argument("predict: V " + V.shape_str() + " does not match U " +
                                U.shape_str() + " and K=" + std::to_string(h.k()));
  }
  const std::size_t d_e = U.cols();
  Tensor e = Tensor::zeros({d_e});
  for (std::size_t i = 0; i < U.rows(); ++i) {
    const double fi = feature.data[i];
    for (std::size_t j = 0; j < d_e; ++j) e.data[j] += fi * U.at(i, j);
  }
  Tensor scores = Tensor::zeros({h.k()});
  for (std::size_t t = 0; t < h.k(); ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < d_e; ++j) s += V.at(t, j) * e.data[j];
    scores.data[t] = s;
  }
  return topdown_decode(scores, h);
}

Predictor::Predictor(const Checkpoint& ckpt) : ckpt_(ckpt) {}

Tensor Predictor::scores(const Sentence& s, const MentionRecord& m) const {
  return compute_scores(ckpt_.params, ckpt_.char_vocab, ckpt_.token_vocab, s, m,
                        ckpt_.variant());
}

Prediction Predictor::predict_mention(const Sentence& s, const MentionRecord& m) const {
  return topdown_decode(scores(s, m), ckpt_.hierarchy);
}

namespace {

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::size_t intersection_size(const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace

MetricsReport evaluate(const std::vector<std::vector<std::size_t>>& predicted,
                       const std::vector<std::vector<std::size_t>>& gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("evaluate: " + std::to_string(predicted.size()) +
                                " predictions vs " + std::to_string(gold.size()) +
                                " gold mentions");
  }
  MetricsReport r;
  r.mentions = gold.size();
  if (gold.empty()) return r;

  std::size_t exact = 0;
  double macro_p_sum = 0.0, macro_r_sum = 0.0;
  std::size_t pooled_overlap = 0, pooled_pred = 0, pooled_gold = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& p = predicted[i];
    const auto& g = gold[i];
    const std::size_t overlap = intersection_size(p, g);
    if (p == g) ++exact;
    macro_p_sum += p.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(p.size());
    macro_r_sum += g.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(g.size());
    pooled_overlap += overlap;
    pooled_pred += p.size();
    pooled_gold += g.size();
  }
  const auto n = static_cast<double>(gold.size());
  r.strict_accuracy = static_cast<double>(exact) / n;
  r.macro_precision = macro_p_sum / n;
  r.macro_recall = macro_r_sum / n;
  r.macro_f1 = harmonic(r.macro_precision, r.macro_recall);
  r.micro_precision =
      pooled_pred > 0 ? static_cast<double>(pooled_overlap) / static_cast<double>(pooled_pred)
                      : 0.0;
  r.micro_recall =
      pooled_gold > 0 ? static_cast<double>(pooled_overlap) / static_cast<double>(pooled_gold)
                      : 0.0;
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  return r;
}

std::vector<TypeReportRow> typewise_report(const std::vector<std::vector<std::size_t>>& predicted,
                                           const std::vector<std::vector<std::size_t>>& gold,
                                           std::size_t top_n) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("typewise_report: misaligned prediction and gold lists");
  }
  std::map<std::size_t, std::size_t> gold_counts;
  for (const auto& g : gold) {
    for (std::size_t t : g) ++gold_counts[t];
  }
  std::vector<std::pair<std::size_t, std::size_t>> by_freq(gold_counts.begin(),
                                                           gold_counts.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (by_freq.size() > top_n) by_freq.resize(top_n);

  std::vector<TypeReportRow> rows;
  for (const auto& [label, support] : by_freq) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool in_p = std::binary_search(predicted[i].begin(), predicted[i].end(), label);
      const bool in_g = std::binary_search(gold[i].begin(), gold[i].end(), label);
      if (in_p && in_g) ++tp;
      if (in_p && !in_g) ++fp;
      if (!in_p && in_g) ++fn;
    }
    TypeReportRow row;
    row.label = label;
    row.support = support;
    row.support_pct = 100.0 * static_cast<double>(support) / static_cast<double>(gold.size());
    row.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    row.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    row.f1 = harmonic(row.precision, row.recall);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace finetype
