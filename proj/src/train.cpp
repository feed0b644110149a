// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/train.hpp"

#include "synmt/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace synmt {

void TrainConfig::validate() const {
  if (warmup_steps < 1) throw ConfigError("warmup_steps must be >= 1");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0)
    throw ConfigError("label_smoothing must be in [0, 1)");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  if (batch_tokens < 1 || max_steps < 1) throw ConfigError("batch_tokens and max_steps must be >= 1");
}

double noam_lr(long step, const TrainConfig& cfg) {
  if (step < 1) step = 1;
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(cfg.warmup_steps);
  return cfg.lr_max * std::min(s / w, std::sqrt(w / s));
}

void AdamOptimizer::step(Model& model, double lr) {
  if (m_.empty()) {
    m_.reserve(model.params.size());
    v_.reserve(model.params.size());
    for (const auto& [name, t] : model.params) {
      m_.push_back(Matrix::Zero(t.rows(), t.cols()));
      v_.push_back(Matrix::Zero(t.rows(), t.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (size_t i = 0; i < model.params.size(); ++i) {
    Tensor& p = model.params[i].second;
    if (p.grad().size() == 0) continue;  // parameter untouched by this batch
    const Matrix& g = p.grad();
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * g.cwiseProduct(g);
    const Matrix mhat = m_[i] / bc1;
    const Matrix vhat = v_[i] / bc2;
    p.value().array() -= lr * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

void AdamOptimizer::restore(std::vector<Matrix> m, std::vector<Matrix> v, long t) {
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

long record_tokens(const Record& r) {
  return static_cast<long>(r.src_ids.size() + r.tgt_ids.size());
}

std::vector<std::vector<size_t>> make_batches(const std::vector<Record>& data,
                                              const std::vector<size_t>& order,
                                              long batch_tokens) {
  std::vector<std::vector<size_t>> batches;
  std::vector<size_t> cur;
  long cur_tokens = 0;
  for (size_t idx : order) {
    const long t = record_tokens(data[idx]);
    if (!cur.empty() && cur_tokens + t > batch_tokens) {
      batches.push_back(std::move(cur));
      cur.clear();
      cur_tokens = 0;
    }
    cur.push_back(idx);
    cur_tokens += t;
  }
  if (!cur.empty()) batches.push_back(std::move(cur));
  return batches;
}

}  // namespace

TrainResult train(Model& model, AdamOptimizer& opt, const std::vector<Record>& data,
                  const TrainConfig& cfg, long start_step,
                  const std::function<void(const TrainLogEntry&)>& on_log) {
  cfg.validate();
  if (data.empty()) throw std::runtime_error("train: no data");
  TrainResult result;
  long step = 0;  // global batch counter, including skipped (resumed) steps

  for (std::uint64_t epoch = 0; step < cfg.max_steps; ++epoch) {
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix(cfg.seed, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (const auto& batch_idx : make_batches(data, order, cfg.batch_tokens)) {
      if (step >= cfg.max_steps) break;
      ++step;
      if (step <= start_step) continue;  // replaying the schedule after resume

      std::vector<Record> batch;
      batch.reserve(batch_idx.size());
      for (size_t i : batch_idx) batch.push_back(data[i]);

      std::mt19937_64 fwd_rng(mix(cfg.seed, 0xF0F0F0F0ull + static_cast<std::uint64_t>(step)));
      model.zero_grads();
      ForwardResult fwd =
          forward_loss(model, batch, cfg.label_smoothing, true, cfg.dropout, &fwd_rng);
      const double loss_val = fwd.total.scalar();
      if (!std::isfinite(loss_val))
        throw DivergenceError("train: non-finite loss at step " + std::to_string(step));
      backward(fwd.total);
      const double lr = noam_lr(step, cfg);
      opt.step(model, lr);

      result.steps = step;
      result.final_loss = fwd.loss.scalar();
      if (on_log && (step % cfg.log_every == 0 || step == cfg.max_steps)) {
        TrainLogEntry e;
        e.step = step;
        e.loss = fwd.loss.scalar();
        e.parse_loss = fwd.parse_loss.valid() ? fwd.parse_loss.scalar() : 0.0;
        e.lr = lr;
        result.log.push_back(e);
        on_log(e);
      }
    }
  }
  return result;
}

double token_accuracy(const Model& model, const std::vector<Record>& data) {
  long correct = 0, total = 0;
  for (const auto& rec : data) {
    Tensor enc = encode(model, rec);
    std::vector<int> tgt_in(rec.tgt_ids.begin(), rec.tgt_ids.end() - 1);
    Matrix logits = teacher_forced_logits(model, enc, tgt_in);
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const int gold = rec.tgt_ids[static_cast<size_t>(i) + 1];
      if (gold == Vocabulary::kPad) continue;
      Eigen::Index best;
      logits.row(i).maxCoeff(&best);
      if (static_cast<int>(best) == gold) ++correct;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace synmt
