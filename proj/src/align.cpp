// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/align.hpp"

namespace synmt {

SubwordAlignment SubwordAlignment::from_token_counts(const std::vector<int>& counts,
                                                     bool with_bos_eos) {
  if (counts.empty()) throw AlignmentError("SubwordAlignment: empty sentence");
  SubwordAlignment a;
  int pos = with_bos_eos ? 1 : 0;
  for (int c : counts) {
    if (c < 1) throw AlignmentError("SubwordAlignment: word with no tokens");
    a.word_spans.push_back({pos, pos + c - 1});
    pos += c;
  }
  a.seq_len = pos + (with_bos_eos ? 1 : 0);
  a.validate();
  return a;
}

void SubwordAlignment::validate() const {
  int prev_end = -1;
  for (const auto& s : word_spans) {
    if (s.start > s.end || s.start <= prev_end)
      throw AlignmentError("SubwordAlignment: spans must be ordered and non-overlapping");
    if (s.start != prev_end + 1 && prev_end >= 0)
      throw AlignmentError("SubwordAlignment: spans must be contiguous");
    prev_end = s.end;
  }
  if (prev_end >= seq_len) throw AlignmentError("SubwordAlignment: span exceeds seq_len");
}

std::vector<double> middle_positions(const SubwordAlignment& alignment) {
  std::vector<double> mid;
  mid.reserve(alignment.word_spans.size());
  for (const auto& s : alignment.word_spans)
    mid.push_back((s.start + s.end) / 2.0);
  return mid;
}

namespace {

// Middle position of each token's parent word, or the token's own position
// for special tokens outside every span.
template <typename PosFn>
std::vector<double> map_tokens(const DepSentence& dep, const SubwordAlignment& alignment,
                               PosFn parent_pos) {
  if (dep.words.size() != alignment.word_spans.size())
    throw AlignmentError("parent mapping: " + std::to_string(dep.words.size()) + " words vs " +
                         std::to_string(alignment.word_spans.size()) + " spans");
  std::vector<double> p(alignment.seq_len);
  for (int t = 0; t < alignment.seq_len; ++t) p[t] = t;  // BOS/EOS/PAD self-parent
  for (size_t w = 0; w < dep.words.size(); ++w) {
    const int head = dep.heads[w];
    // Root word's parent is itself.
    const size_t parent_word = head == 0 ? w : static_cast<size_t>(head - 1);
    const double pos = parent_pos(alignment.word_spans[parent_word]);
    for (int t = alignment.word_spans[w].start; t <= alignment.word_spans[w].end; ++t) p[t] = pos;
  }
  return p;
}

}  // namespace

std::vector<double> map_parents_middle(const DepSentence& dep, const SubwordAlignment& alignment) {
  return map_tokens(dep, alignment,
                    [](const SubwordAlignment::Span& s) { return (s.start + s.end) / 2.0; });
}

std::vector<int> map_parents_first_subword(const DepSentence& dep,
                                           const SubwordAlignment& alignment) {
  auto real = map_tokens(dep, alignment,
                         [](const SubwordAlignment::Span& s) { return double(s.start); });
  std::vector<int> p(real.size());
  for (size_t i = 0; i < real.size(); ++i) p[i] = static_cast<int>(real[i]);
  return p;
}

std::vector<int> labels_per_token(const DepSentence& dep, const SubwordAlignment& alignment,
                                  const Vocabulary& label_vocab) {
  if (dep.words.size() != alignment.word_spans.size())
    throw AlignmentError("labels_per_token: word/span count mismatch");
  const int none_id = label_vocab.id(kNoneLabel);
  const int unk_id = label_vocab.id(kUnkLabel);
  std::vector<int> out(alignment.seq_len, none_id);
  for (size_t w = 0; w < dep.words.size(); ++w) {
    const int id = label_vocab.contains(dep.labels[w]) ? label_vocab.id(dep.labels[w]) : unk_id;
    for (int t = alignment.word_spans[w].start; t <= alignment.word_spans[w].end; ++t) out[t] = id;
  }
  return out;
}

Vocabulary build_label_vocab(const std::vector<DepSentence>& parses) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(parses.size());
  for (const auto& s : parses) corpus.push_back(s.labels);
  return Vocabulary::build(corpus, 1, {kNoneLabel, kUnkLabel});
}

}  // namespace synmt
