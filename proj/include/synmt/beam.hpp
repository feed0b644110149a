// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_BEAM_HPP
#define SYNMT_BEAM_HPP

#include "synmt/model.hpp"

#include <vector>

namespace synmt {

struct DecodeConfig {
  int beam_size = 4;
  double alpha = 0.6;  // GNMT length penalty exponent
  int max_out_len = 64;

  void validate() const {
    if (beam_size < 1) throw ConfigError("beam_size must be >= 1");
    if (max_out_len < 1) throw ConfigError("max_out_len must be >= 1");
  }
};

/// GNMT normalization lp(len) = ((5 + len) / 6)^alpha.
double length_penalty(int len, double alpha);

struct DecodeResult {
  std::vector<int> ids;      // includes BOS and, when reached, EOS
  bool reached_eos = false;  // false: ran out of budget, best unfinished
  double score = 0.0;        // sum log-prob / lp(len)
};

/// Beam search over the target vocabulary. Hypotheses are expanded by raw
/// sum log-prob; finished hypotheses compete under the length penalty.
DecodeResult beam_search(const Model& model, const Record& src, const DecodeConfig& cfg);

/// Greedy decoding (argmax each step); reference path for beam_size == 1.
DecodeResult greedy_decode(const Model& model, const Record& src, int max_out_len);

}  // namespace synmt

#endif  // SYNMT_BEAM_HPP
