// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_VOCAB_HPP
#define SYNMT_VOCAB_HPP

#include <string>
#include <unordered_map>
#include <vector>

namespace synmt {

/// Token <-> id bijection with fixed reserved ids.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocabulary();

  /// Appends a token; returns its id. Throws on duplicates.
  int add(const std::string& token);
  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  bool contains(const std::string& token) const { return to_id_.count(token) != 0; }
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<int> encode(const std::vector<std::string>& tokens, bool add_bos_eos) const;
  std::vector<std::string> decode(const std::vector<int>& ids, bool strip_special) const;

  /// Counts tokens across the corpus and keeps those with count >= min_freq,
  /// ordered by (-count, lexicographic). `pinned` tokens (e.g. task tags) are
  /// always included, ahead of counted tokens.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus, int min_freq,
                          const std::vector<std::string>& pinned = {});

  /// One token per line; ids resume after the 4 reserved entries.
  std::string save() const;
  static Vocabulary load(const std::string& text);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> to_id_;
};

}  // namespace synmt

#endif  // SYNMT_VOCAB_HPP
