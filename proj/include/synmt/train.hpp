// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_TRAIN_HPP
#define SYNMT_TRAIN_HPP

#include "synmt/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace synmt {

struct TrainConfig {
  double lr_max = 0.0007;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
  int warmup_steps = 8000;
  double label_smoothing = 0.1;
  double dropout = 0.1;
  long batch_tokens = 2000;  // source + target tokens per update
  long max_steps = 1000;
  std::uint64_t seed = 1;
  long log_every = 100;

  void validate() const;
};

/// Linear warmup to lr_max at warmup_steps, then inverse-sqrt decay:
/// lr(step) = lr_max * min(step/warmup, sqrt(warmup/step)).
double noam_lr(long step, const TrainConfig& cfg);

/// Adam with bias correction. State tensors are addressable by parameter
/// order, which build_model fixes.
class AdamOptimizer {
 public:
  AdamOptimizer(double beta1, double beta2, double eps) : b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(Model& model, double lr);
  long steps_taken() const { return t_; }

  // Checkpoint plumbing.
  const std::vector<Matrix>& moment1() const { return m_; }
  const std::vector<Matrix>& moment2() const { return v_; }
  void restore(std::vector<Matrix> m, std::vector<Matrix> v, long t);

 private:
  double b1_, b2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

struct TrainLogEntry {
  long step = 0;
  double loss = 0.0;
  double parse_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  long steps = 0;
  double final_loss = 0.0;
  std::vector<TrainLogEntry> log;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic training loop: shuffles example order per epoch with the
/// run seed, groups batches up to batch_tokens, applies one Adam update per
/// batch. `on_log` fires every log_every steps and at the final step.
TrainResult train(Model& model, AdamOptimizer& opt, const std::vector<Record>& data,
                  const TrainConfig& cfg, long start_step = 0,
                  const std::function<void(const TrainLogEntry&)>& on_log = nullptr);

/// Teacher-forced token accuracy (argmax over logits vs gold, PAD skipped).
double token_accuracy(const Model& model, const std::vector<Record>& data);

}  // namespace synmt

#endif  // SYNMT_TRAIN_HPP
