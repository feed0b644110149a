// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_MODEL_HPP
#define SYNMT_MODEL_HPP

#include "synmt/attention.hpp"
#include "synmt/records.hpp"
#include "synmt/tensor.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace synmt {

enum class SyntaxMode { kNone, kPascal, kLisa, kMultitask, kSh };

std::string to_string(SyntaxMode m);
SyntaxMode syntax_mode_from_string(const std::string& s);

struct TransformerConfig {
  int layers_enc = 2;
  int layers_dec = 2;
  int d_model = 128;
  int d_ff = 512;
  AttentionConfig attention;
  int src_vocab = 0;
  int tgt_vocab = 0;
  int n_labels = 0;  // dependency label vocabulary (S&H mode)
  int max_len = 256;
  SyntaxMode syntax_mode = SyntaxMode::kNone;
  int sh_label_dim = 10;
  double lisa_lambda = 1.0;  // weight of the parse loss in the joint objective
  bool tie_embeddings = false;

  void validate() const;
};

/// Encoder-decoder transformer with named parameter tensors. Parameter
/// creation order is fixed, so two builds from the same seed are identical.
struct Model {
  TransformerConfig cfg;
  std::vector<std::pair<std::string, Tensor>> params;  // ordered, unique names
  Matrix pos_encoding;  // max_len x d_model, sinusoidal, not trainable

  const Tensor& p(const std::string& name) const;
  bool has(const std::string& name) const;
  long count_parameters() const;
  void zero_grads();
};

Model build_model(const TransformerConfig& cfg, std::uint64_t seed);

/// Replaces the last sh_label_dim dimensions of each token embedding row by
/// the label embedding; total width unchanged.
Tensor sh_embed(const Tensor& token_emb, const Tensor& label_table,
                const std::vector<int>& label_ids);

struct ForwardResult {
  Tensor loss;        // token-mean label-smoothed cross entropy over the batch
  Tensor parse_loss;  // valid only in LISA mode (unweighted)
  Tensor total;       // loss + lambda * parse_loss (== loss outside LISA)
  long target_tokens = 0;
};

/// Batch loss. `dropout` applies to embeddings, sublayer outputs and
/// attention weights when training; rng required iff training with dropout
/// or parent ignoring.
ForwardResult forward_loss(const Model& model, const std::vector<Record>& batch,
                           double label_smoothing, bool training, double dropout = 0.0,
                           std::mt19937_64* rng = nullptr);

/// Encoder output for one source sentence (inference path).
Tensor encode(const Model& model, const Record& rec, bool training = false, double dropout = 0.0,
              std::mt19937_64* rng = nullptr);

/// Output logits (len(tgt_in) x V) for a gold target prefix (inference path).
Matrix teacher_forced_logits(const Model& model, const Tensor& enc_out,
                             const std::vector<int>& tgt_in);

/// Log-probabilities (1 x V) of the token following `tgt_prefix`.
Eigen::RowVectorXd next_token_logprobs(const Model& model, const Tensor& enc_out,
                                       const std::vector<int>& tgt_prefix);

}  // namespace synmt

#endif  // SYNMT_MODEL_HPP
