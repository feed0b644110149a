// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/data.hpp"

#include <algorithm>
#include <random>

namespace synmt {

std::vector<ParallelExample> multitask_augment(const std::vector<ParallelExample>& examples,
                                               std::uint64_t seed) {
  std::vector<ParallelExample> out;
  out.reserve(examples.size() * 2);
  for (const auto& ex : examples) {
    ParallelExample translate = ex;
    translate.task_tag = kTranslateTag;
    out.push_back(std::move(translate));
    ParallelExample parse = ex;
    parse.task_tag = kParseTag;
    parse.target = linearize_parse(ex.source);
    out.push_back(std::move(parse));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace synmt
