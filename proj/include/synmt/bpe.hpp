// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_BPE_HPP
#define SYNMT_BPE_HPP

#include <string>
#include <unordered_map>
#include <vector>

namespace synmt {

/// Byte-pair encoding with the "@@" continuation-marker convention:
/// every sub-word of a split word except the last carries a trailing "@@".
class BpeModel {
 public:
  BpeModel() = default;
  explicit BpeModel(std::vector<std::pair<std::string, std::string>> merges);

  /// Learns `num_merges` merge rules from whitespace-tokenized lines.
  static BpeModel learn(const std::vector<std::string>& lines, int num_merges);

  /// Splits one word. Unknown characters pass through as singletons.
  std::vector<std::string> apply(const std::string& word) const;

  /// Applies BPE to every word of a pre-tokenized sentence.
  std::vector<std::string> apply_sentence(const std::vector<std::string>& words) const;

  /// Inverse of apply_sentence: glues "x@@ y" back into "xy".
  static std::vector<std::string> unapply(const std::vector<std::string>& tokens);

  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

  /// One "left right" pair per line; priority = line order.
  std::string save() const;
  static BpeModel load(const std::string& text);

 private:
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, int> rank_;  // "left right" -> priority
};

}  // namespace synmt

#endif  // SYNMT_BPE_HPP
