// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_ALIGN_HPP
#define SYNMT_ALIGN_HPP

#include "synmt/conllu.hpp"
#include "synmt/vocab.hpp"

#include <stdexcept>
#include <vector>

namespace synmt {

struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Word -> sub-word token span map for one sentence after BPE, with BOS at
/// token 0 and EOS at token seq_len-1. Spans are inclusive, contiguous and
/// cover all non-special tokens.
struct SubwordAlignment {
  struct Span {
    int start = 0;
    int end = 0;  // inclusive
  };
  std::vector<Span> word_spans;
  int seq_len = 0;

  /// Builds the alignment from per-word sub-word counts; `with_bos_eos`
  /// offsets every span by 1 and appends the EOS slot.
  static SubwordAlignment from_token_counts(const std::vector<int>& counts, bool with_bos_eos);
  void validate() const;
};

/// (start + end) / 2 for each word span; fractional for even-length spans.
std::vector<double> middle_positions(const SubwordAlignment& alignment);

/// Real-valued position of each token's dependency parent's middle. Tokens
/// of the root word point at that word's own middle; BOS/EOS point at
/// themselves.
std::vector<double> map_parents_middle(const DepSentence& dep, const SubwordAlignment& alignment);

/// Integer parent positions: the first sub-word of the parent word's span.
std::vector<int> map_parents_first_subword(const DepSentence& dep, const SubwordAlignment& alignment);

/// Per-token dependency label ids: each sub-word inherits its word's DEPREL,
/// special tokens get `<none>`, labels missing from the vocabulary get
/// `<unk-label>`.
std::vector<int> labels_per_token(const DepSentence& dep, const SubwordAlignment& alignment,
                                  const Vocabulary& label_vocab);

inline constexpr const char* kNoneLabel = "<none>";
inline constexpr const char* kUnkLabel = "<unk-label>";

/// Label vocabulary over training parses; reserves <none> and <unk-label>.
Vocabulary build_label_vocab(const std::vector<DepSentence>& parses);

}  // namespace synmt

#endif  // SYNMT_ALIGN_HPP
