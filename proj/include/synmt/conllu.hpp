// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_CONLLU_HPP
#define SYNMT_CONLLU_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace synmt {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One dependency-parsed sentence. Heads are 1-based word indices; head 0
/// marks the syntactic root. Arcs must form a tree with exactly one root.
struct DepSentence {
  std::vector<std::string> words;
  std::vector<int> heads;
  std::vector<std::string> labels;

  size_t size() const { return words.size(); }
  /// Throws ParseError if sizes disagree, heads are out of range, the root
  /// count is not 1, or the arcs contain a cycle.
  void validate() const;
};

/// Reads CoNLL-U text (10 tab-separated columns, blank-line separated,
/// '#' comments, multiword ranges like "1-2" skipped). Keeps FORM, HEAD
/// and DEPREL. Parse errors name the offending 1-based line.
std::vector<DepSentence> parse_conllu(const std::string& text);

/// Minimal CoNLL-U writer; inverse of parse_conllu on the kept columns.
std::string serialize_conllu(const std::vector<DepSentence>& sentences);

/// Depth-first bracketed linearization "( LABEL word children... )",
/// children in surface order, starting at the root.
std::vector<std::string> linearize_parse(const DepSentence& s);

}  // namespace synmt

#endif  // SYNMT_CONLLU_HPP
