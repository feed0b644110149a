// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_ATTENTION_HPP
#define SYNMT_ATTENTION_HPP

#include "synmt/tensor.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace synmt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CombineMode { kMultiply, kAdd };
enum class ParentMode { kGaussian, kParentOnly };

struct AttentionConfig {
  int d_model = 128;
  int heads = 4;          // H
  int n_pascal = 0;       // parent-scaled heads in layer pascal_layer
  int pascal_layer = 1;   // 1-based encoder layer index
  double sigma2 = 1.0;    // Gaussian variance
  double parent_ignore_q = 0.0;
  CombineMode combine_mode = CombineMode::kMultiply;
  ParentMode parent_mode = ParentMode::kGaussian;

  void validate() const {
    if (heads < 1 || d_model % heads != 0) throw ConfigError("d_model must be divisible by H");
    if (n_pascal < 0 || n_pascal > heads) throw ConfigError("n_pascal must be in [0, H]");
    if (parent_mode == ParentMode::kGaussian && sigma2 <= 0.0)
      throw ConfigError("sigma2 must be > 0");
    if (parent_ignore_q < 0.0 || parent_ignore_q > 1.0)
      throw ConfigError("parent ignoring q must be in [0, 1]");
  }
};

/// D^p: row t is the Gaussian density centered at p[t] sampled at integer
/// columns j = 0..T-1.
Matrix gaussian_distance_matrix(const std::vector<double>& p, int T, double sigma2);

/// Degenerate distance matrix: mass 1 at the parent middle, split linearly
/// over floor/ceil for fractional positions; all other entries 1e-9.
Matrix parent_only_matrix(const std::vector<double>& p, int T);

/// Training-time regularizer: each row independently reset to all-ones with
/// probability q. Identity at inference regardless of q.
Matrix parent_ignore(const Matrix& D, double q, std::mt19937_64& rng, bool training);

/// S = Q K^T / sqrt(d).
Tensor scaled_scores(const Tensor& Q, const Tensor& K);

/// Multiply: N = S .* D (the parent-scaled score). Add: N = S + D.
Tensor combine(const Tensor& S, const Matrix& D, CombineMode mode);

/// Projection weights of one head; identical shape for every head kind.
struct HeadWeights {
  Tensor wq, wk, wv;  // each d_model x d
};

/// Extra weights of the parse-supervised biaffine head.
struct BiaffineWeights {
  Tensor ffq_w, ffq_b;  // d_model x d, 1 x d
  Tensor ffk_w, ffk_b;
  Tensor bilinear;  // d x d, the biaffine operator replacing the dot product
};

struct HeadContext {
  const BoolMatrix* mask = nullptr;  // false columns excluded before softmax
  bool training = false;
  double attn_dropout = 0.0;
  std::mt19937_64* rng = nullptr;
};

Tensor standard_head_forward(const Tensor& X, const HeadWeights& w, const HeadContext& ctx);

/// Parent-scaled head: scores weighted by Gaussian proximity to each
/// token's dependency-parent middle position before the softmax.
Tensor pascal_head_forward(const Tensor& X, const std::vector<double>& p,
                           const AttentionConfig& cfg, const HeadWeights& w,
                           const HeadContext& ctx);

struct BiaffineHeadResult {
  Tensor output;
  Tensor parse_loss;  // mean over rows of -log A[t][parent_idx[t]]
};

/// Parse-supervised head: query/key feed-forwards and a bilinear scorer; the
/// attention rows double as a distribution over parent positions.
BiaffineHeadResult lisa_head_forward(const Tensor& X, const std::vector<int>& parent_idx,
                                     const HeadWeights& w, const BiaffineWeights& bw,
                                     const HeadContext& ctx);

}  // namespace synmt

#endif  // SYNMT_ATTENTION_HPP
