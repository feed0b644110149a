// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_DATA_HPP
#define SYNMT_DATA_HPP

#include "synmt/conllu.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace synmt {

inline constexpr const char* kTranslateTag = "<mt>";
inline constexpr const char* kParseTag = "<parse>";

/// One aligned sentence pair: parsed source, word-level target.
struct ParallelExample {
  DepSentence source;
  std::vector<std::string> target;
  std::string task_tag;  // empty, kTranslateTag or kParseTag
};

/// Duplicates every example as a parsing task (target = linearized parse of
/// the source) and tags both copies, then shuffles the combined data with
/// the run seed. Exactly doubles the corpus; original targets survive.
std::vector<ParallelExample> multitask_augment(const std::vector<ParallelExample>& examples,
                                               std::uint64_t seed);

}  // namespace synmt

#endif  // SYNMT_DATA_HPP
