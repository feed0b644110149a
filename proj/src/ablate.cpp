// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/ablate.hpp"

#include <sstream>

namespace synmt {

std::vector<AblationVariant> sigma2_grid(const TransformerConfig& base) {
  std::vector<AblationVariant> out;
  TransformerConfig po = base;
  po.attention.parent_mode = ParentMode::kParentOnly;
  out.push_back({"parent_only", po});
  for (double s2 : {1.0, 4.0, 9.0, 16.0, 25.0}) {
    TransformerConfig c = base;
    c.attention.parent_mode = ParentMode::kGaussian;
    c.attention.sigma2 = s2;
    std::ostringstream name;
    name << "sigma2_" << s2;
    out.push_back({name.str(), c});
  }
  return out;
}

std::vector<AblationVariant> layer_grid(const TransformerConfig& base) {
  std::vector<AblationVariant> out;
  for (int l = 1; l <= base.layers_enc; ++l) {
    TransformerConfig c = base;
    c.attention.pascal_layer = l;
    out.push_back({"layer_" + std::to_string(l), c});
  }
  return out;
}

std::vector<AblationVariant> combine_grid(const TransformerConfig& base) {
  TransformerConfig mul = base, add = base;
  mul.attention.combine_mode = CombineMode::kMultiply;
  add.attention.combine_mode = CombineMode::kAdd;
  return {{"multiply", mul}, {"add", add}};
}

double validation_bleu(const Model& model, const std::vector<Record>& valid,
                       const std::vector<std::string>& refs, const Vocabulary& tgt_vocab,
                       const DecodeConfig& dcfg) {
  if (valid.size() != refs.size())
    throw std::runtime_error("validation_bleu: record/reference count mismatch");
  std::vector<std::string> hyps;
  hyps.reserve(valid.size());
  for (const auto& rec : valid) {
    DecodeResult res = beam_search(model, rec, dcfg);
    std::vector<std::string> toks = tgt_vocab.decode(res.ids, true);
    toks = BpeModel::unapply(toks);
    std::string line;
    for (size_t i = 0; i < toks.size(); ++i) line += (i ? " " : "") + toks[i];
    hyps.push_back(std::move(line));
  }
  return bleu_13a(hyps, refs).score;
}

std::vector<AblationCell> ablation_run(const std::vector<AblationVariant>& variants,
                                       const TrainConfig& tcfg, const DecodeConfig& dcfg,
                                       const std::vector<Record>& train_data,
                                       const std::vector<Record>& valid_data,
                                       const std::vector<std::string>& valid_refs,
                                       const Vocabulary& tgt_vocab, std::uint64_t seed) {
  std::vector<AblationCell> cells;
  for (const auto& variant : variants) {
    AblationCell cell;
    cell.name = variant.name;
    try {
      Model model = build_model(variant.cfg, seed);
      AdamOptimizer opt(tcfg.beta1, tcfg.beta2, tcfg.adam_eps);
      train(model, opt, train_data, tcfg);
      cell.bleu = validation_bleu(model, valid_data, valid_refs, tgt_vocab, dcfg);
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::string ablation_to_tsv(const std::vector<AblationCell>& cells) {
  std::ostringstream out;
  out << "variant\tstatus\tbleu\n";
  out.precision(6);
  for (const auto& c : cells) {
    out << c.name << '\t' << (c.ok ? "ok" : "failed") << '\t';
    if (c.ok)
      out << c.bleu;
    else
      out << '-';
    out << '\n';
  }
  return out.str();
}

}  // namespace synmt
