// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_PREPROCESS_HPP
#define SYNMT_PREPROCESS_HPP

#include "synmt/align.hpp"
#include "synmt/bpe.hpp"
#include "synmt/data.hpp"
#include "synmt/records.hpp"
#include "synmt/vocab.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace synmt {

struct PreprocessOptions {
  int bpe_merges = 200;
  int min_freq = 1;
  bool multitask = false;
  std::uint64_t seed = 1;
};

struct PreprocessedData {
  std::vector<Record> records;
  Vocabulary src_vocab;
  Vocabulary tgt_vocab;
  Vocabulary label_vocab;
  BpeModel bpe;
};

/// Numericizes one example with learned artifacts. Task tags become single
/// source tokens right after BOS and before EOS; parse-task targets keep
/// brackets and labels atomic while words go through BPE.
Record make_record(const ParallelExample& ex, const BpeModel& bpe, const Vocabulary& src_vocab,
                   const Vocabulary& tgt_vocab, const Vocabulary& label_vocab);

/// Source-only record for translation input.
Record make_source_record(const DepSentence& dep, const BpeModel& bpe,
                          const Vocabulary& src_vocab, const Vocabulary& label_vocab);

/// Full pipeline: learn BPE over both sides, build vocabularies (task tags
/// and parse-structure tokens pinned when multitask), apply the optional
/// multitask augmentation, and numericize everything.
PreprocessedData preprocess(const std::vector<ParallelExample>& examples,
                            const PreprocessOptions& opt);

}  // namespace synmt

#endif  // SYNMT_PREPROCESS_HPP
