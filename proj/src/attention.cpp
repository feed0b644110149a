// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/attention.hpp"

#include <cmath>

namespace synmt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Matrix attn_dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng) < p ? 0.0 : scale;
  return m;
}

Tensor attend(const Tensor& N, const Tensor& V, const HeadContext& ctx) {
  Tensor A = softmax_rows(N, ctx.mask);
  if (ctx.training && ctx.attn_dropout > 0.0) {
    if (!ctx.rng) throw ConfigError("attention dropout requires an rng");
    A = dropout_mask(A, attn_dropout_mask(A.rows(), A.cols(), ctx.attn_dropout, *ctx.rng));
  }
  return matmul(A, V);
}

}  // namespace

Matrix gaussian_distance_matrix(const std::vector<double>& p, int T, double sigma2) {
  if (sigma2 <= 0.0) throw ConfigError("gaussian_distance_matrix: sigma2 must be > 0");
  if (T < 1 || static_cast<int>(p.size()) != T)
    throw ConfigError("gaussian_distance_matrix: parent vector length must equal T");
  const double norm = 1.0 / std::sqrt(kTwoPi * sigma2);
  Matrix D(T, T);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < T; ++j) {
      const double diff = j - p[t];
      D(t, j) = norm * std::exp(-diff * diff / (2.0 * sigma2));
    }
  return D;
}

Matrix parent_only_matrix(const std::vector<double>& p, int T) {
  constexpr double kFloor = 1e-9;  // keeps rows strictly positive
  if (T < 1 || static_cast<int>(p.size()) != T)
    throw ConfigError("parent_only_matrix: parent vector length must equal T");
  Matrix D = Matrix::Constant(T, T, kFloor);
  for (int t = 0; t < T; ++t) {
    const double lo = std::floor(p[t]);
    const double frac = p[t] - lo;
    const int jlo = static_cast<int>(lo);
    if (frac == 0.0) {
      D(t, jlo) += 1.0;
    } else {
      D(t, jlo) += 1.0 - frac;
      D(t, jlo + 1) += frac;
    }
  }
  return D;
}

Matrix parent_ignore(const Matrix& D, double q, std::mt19937_64& rng, bool training) {
  if (q < 0.0 || q > 1.0) throw ConfigError("parent_ignore: q must be in [0, 1]");
  if (!training || q == 0.0) return D;
  Matrix out = D;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index t = 0; t < D.rows(); ++t)
    if (u(rng) < q) out.row(t).setOnes();
  return out;
}

Tensor scaled_scores(const Tensor& Q, const Tensor& K) {
  if (Q.cols() != K.cols()) throw DimensionError("scaled_scores: d mismatch");
  return scale(matmul(Q, transpose(K)), 1.0 / std::sqrt(static_cast<double>(Q.cols())));
}

Tensor combine(const Tensor& S, const Matrix& D, CombineMode mode) {
  return mode == CombineMode::kMultiply ? mul_const(S, D) : add_const(S, D);
}

Tensor standard_head_forward(const Tensor& X, const HeadWeights& w, const HeadContext& ctx) {
  Tensor S = scaled_scores(matmul(X, w.wq), matmul(X, w.wk));
  return attend(S, matmul(X, w.wv), ctx);
}

Tensor pascal_head_forward(const Tensor& X, const std::vector<double>& p,
                           const AttentionConfig& cfg, const HeadWeights& w,
                           const HeadContext& ctx) {
  cfg.validate();
  const int T = static_cast<int>(X.rows());
  if (static_cast<int>(p.size()) != T)
    throw DimensionError("pascal_head_forward: parent vector length != T");
  Matrix D = cfg.parent_mode == ParentMode::kGaussian
                 ? gaussian_distance_matrix(p, T, cfg.sigma2)
                 : parent_only_matrix(p, T);
  if (ctx.training && cfg.parent_ignore_q > 0.0) {
    if (!ctx.rng) throw ConfigError("parent ignoring requires an rng");
    D = parent_ignore(D, cfg.parent_ignore_q, *ctx.rng, ctx.training);
  }
  Tensor S = scaled_scores(matmul(X, w.wq), matmul(X, w.wk));
  Tensor N = combine(S, D, cfg.combine_mode);
  return attend(N, matmul(X, w.wv), ctx);
}

BiaffineHeadResult lisa_head_forward(const Tensor& X, const std::vector<int>& parent_idx,
                                     const HeadWeights& w, const BiaffineWeights& bw,
                                     const HeadContext& ctx) {
  const int T = static_cast<int>(X.rows());
  if (static_cast<int>(parent_idx.size()) != T)
    throw DimensionError("lisa_head_forward: parent index length != T");
  for (int idx : parent_idx)
    if (idx < 0 || idx >= T) throw DimensionError("lisa_head_forward: parent index out of range");
  Tensor Qf = relu(add_rowvec(matmul(X, bw.ffq_w), bw.ffq_b));
  Tensor Kf = relu(add_rowvec(matmul(X, bw.ffk_w), bw.ffk_b));
  Tensor scores = matmul(matmul(Qf, bw.bilinear), transpose(Kf));
  Tensor A = softmax_rows(scores, ctx.mask);
  Tensor parse_loss = nll_rows(A, parent_idx);
  Tensor attn = A;
  if (ctx.training && ctx.attn_dropout > 0.0) {
    if (!ctx.rng) throw ConfigError("attention dropout requires an rng");
    attn = dropout_mask(attn, attn_dropout_mask(T, T, ctx.attn_dropout, *ctx.rng));
  }
  return {matmul(attn, matmul(X, w.wv)), parse_loss};
}

}  // namespace synmt
