// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_BLEU_HPP
#define SYNMT_BLEU_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace synmt {

/// mteval-v13a tokenization: punctuation split off, period/comma kept inside
/// numbers, hyphen split after digits. Case-sensitive.
std::vector<std::string> tokenize_13a(const std::string& line);

struct BleuReport {
  double score = 0.0;  // 0..100
  double precisions[4] = {0, 0, 0, 0};
  double brevity_penalty = 1.0;
  long hyp_length = 0;
  long ref_length = 0;

  std::string to_tsv() const;
};

/// Corpus-level case-sensitive 4-gram BLEU with 13a tokenization and no
/// smoothing (any zero n-gram precision gives score 0).
BleuReport bleu_13a(const std::vector<std::string>& hypotheses,
                    const std::vector<std::string>& references);

struct LengthBucketReport {
  std::vector<int> upper_bounds;  // last bucket is open-ended
  struct Bucket {
    std::string label;
    long count = 0;
    double percent = 0.0;
    // System name -> BLEU; absent for empty buckets.
    std::map<std::string, std::optional<double>> bleu;
    std::map<std::string, std::optional<double>> delta;  // vs the baseline system
  };
  std::vector<Bucket> buckets;
  std::string baseline;

  std::string to_tsv() const;
};

/// Per-bucket BLEU by source length for several systems, with deltas against
/// a named baseline system.
LengthBucketReport length_bucket_report(
    const std::map<std::string, std::vector<std::string>>& systems,
    const std::vector<std::string>& references, const std::vector<int>& source_lens,
    const std::vector<int>& bucket_upper_bounds, const std::string& baseline);

}  // namespace synmt

#endif  // SYNMT_BLEU_HPP
