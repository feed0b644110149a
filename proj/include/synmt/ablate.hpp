// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_ABLATE_HPP
#define SYNMT_ABLATE_HPP

#include "synmt/beam.hpp"
#include "synmt/bleu.hpp"
#include "synmt/bpe.hpp"
#include "synmt/model.hpp"
#include "synmt/train.hpp"
#include "synmt/vocab.hpp"

#include <string>
#include <vector>

namespace synmt {

struct AblationVariant {
  std::string name;
  TransformerConfig cfg;
};

/// Gaussian-variance grid: parent-only plus sigma^2 in {1,4,9,16,25}.
std::vector<AblationVariant> sigma2_grid(const TransformerConfig& base);

/// Parent-scaled-layer grid: l_s = 1..layers_enc.
std::vector<AblationVariant> layer_grid(const TransformerConfig& base);

/// Multiply vs add combine modes.
std::vector<AblationVariant> combine_grid(const TransformerConfig& base);

struct AblationCell {
  std::string name;
  bool ok = false;
  double bleu = 0.0;
  std::string error;
};

/// Decodes every record with beam search and scores against references.
double validation_bleu(const Model& model, const std::vector<Record>& valid,
                       const std::vector<std::string>& refs, const Vocabulary& tgt_vocab,
                       const DecodeConfig& dcfg);

/// Trains each variant identically except its config delta and records the
/// validation BLEU. A diverging variant is reported as a failed cell; the
/// run continues.
std::vector<AblationCell> ablation_run(const std::vector<AblationVariant>& variants,
                                       const TrainConfig& tcfg, const DecodeConfig& dcfg,
                                       const std::vector<Record>& train_data,
                                       const std::vector<Record>& valid_data,
                                       const std::vector<std::string>& valid_refs,
                                       const Vocabulary& tgt_vocab, std::uint64_t seed);

/// Machine-readable table: header row + one row per variant.
std::string ablation_to_tsv(const std::vector<AblationCell>& cells);

}  // namespace synmt

#endif  // SYNMT_ABLATE_HPP
