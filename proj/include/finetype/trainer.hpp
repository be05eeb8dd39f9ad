#pragma once

#include <string>
#include <vector>

#include "finetype/checkpoint.hpp"
#include "finetype/corpus.hpp"

namespace finetype {

struct TrainResult {
  Checkpoint best;  // parameters from the epoch with the highest dev micro-F1
  std::vector<std::string> log_lines;  // epoch, objective, dev strict/macro/micro
  std::size_t best_epoch = 0;          // 1-based
  double best_dev_micro_f1 = 0.0;
};

// Mini-batch Adam training. All randomness (initialization, shuffling,
// dropout) flows from one stream seeded with cfg.seed, in a fixed draw
// order, so identical inputs give bit-identical results. Corpora must be
// pre-filtered (no unlabeled or zero-length mentions). A warm checkpoint
// seeds the LSTM weights and overlapping vocabulary rows.
TrainResult train(const Corpus& train_corpus, const Corpus& dev_corpus, const TrainConfig& cfg,
                  const Checkpoint* warm = nullptr);

struct GradCheckReport {
  bool passed = false;
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;

  std::string summary() const;
};

// Central finite differences (eps = 1e-5) against the tape's reverse pass on
// a built-in three-mention fixture (one noisy, two clean, K = 5), covering
// every tensor entry. Dropout masks, when cfg.dropout_p > 0, are drawn once
// and held fixed. corrupt_tensor deliberately perturbs that tensor's
// analytic gradient so tests can watch the check fail.
GradCheckReport gradient_check(const TrainConfig& cfg, const std::string& corrupt_tensor = "");

}  // namespace finetype
