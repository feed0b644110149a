// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/preprocess.hpp"

#include <set>

namespace synmt {

namespace {

// BPE for a parse-task target: "(", ")" and the label right after "(" stay
// atomic; word tokens split normally.
std::vector<std::string> bpe_parse_target(const BpeModel& bpe,
                                          const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  bool prev_was_open = false;
  for (const auto& t : tokens) {
    if (t == "(" || t == ")" || prev_was_open) {
      out.push_back(t);
    } else {
      auto pieces = bpe.apply(t);
      out.insert(out.end(), pieces.begin(), pieces.end());
    }
    prev_was_open = (t == "(");
  }
  return out;
}

struct SourceTokens {
  std::vector<std::string> tokens;  // without BOS/EOS
  SubwordAlignment alignment;      // spans over the full sequence incl BOS/EOS
};

SourceTokens tokenize_source(const DepSentence& dep, const BpeModel& bpe,
                             const std::string& task_tag) {
  SourceTokens st;
  const int prefix = 1 + (task_tag.empty() ? 0 : 1);  // BOS [+ tag]
  if (!task_tag.empty()) st.tokens.push_back(task_tag);
  int pos = prefix;
  for (const auto& w : dep.words) {
    auto pieces = bpe.apply(w);
    st.alignment.word_spans.push_back({pos, pos + static_cast<int>(pieces.size()) - 1});
    pos += static_cast<int>(pieces.size());
    st.tokens.insert(st.tokens.end(), pieces.begin(), pieces.end());
  }
  if (!task_tag.empty()) st.tokens.push_back(task_tag);
  st.alignment.seq_len = pos + (task_tag.empty() ? 0 : 1) + 1;  // [tag] + EOS
  st.alignment.validate();
  return st;
}

}  // namespace

Record make_record(const ParallelExample& ex, const BpeModel& bpe, const Vocabulary& src_vocab,
                   const Vocabulary& tgt_vocab, const Vocabulary& label_vocab) {
  ex.source.validate();
  Record rec;
  SourceTokens st = tokenize_source(ex.source, bpe, ex.task_tag);
  auto src_ids = src_vocab.encode(st.tokens, true);
  rec.src_ids.assign(src_ids.begin(), src_ids.end());

  rec.parent_middle = map_parents_middle(ex.source, st.alignment);
  auto pf = map_parents_first_subword(ex.source, st.alignment);
  rec.parent_first.assign(pf.begin(), pf.end());
  auto labels = labels_per_token(ex.source, st.alignment, label_vocab);
  rec.label_ids.assign(labels.begin(), labels.end());

  std::vector<std::string> tgt_tokens = ex.task_tag == kParseTag
                                            ? bpe_parse_target(bpe, ex.target)
                                            : bpe.apply_sentence(ex.target);
  auto tgt_ids = tgt_vocab.encode(tgt_tokens, true);
  rec.tgt_ids.assign(tgt_ids.begin(), tgt_ids.end());
  return rec;
}

Record make_source_record(const DepSentence& dep, const BpeModel& bpe,
                          const Vocabulary& src_vocab, const Vocabulary& label_vocab) {
  ParallelExample ex;
  ex.source = dep;
  ex.target = {"<unk>"};  // placeholder; decoding ignores the target side
  Vocabulary dummy_tgt;
  Record rec = make_record(ex, bpe, src_vocab, dummy_tgt, label_vocab);
  rec.tgt_ids.clear();
  return rec;
}

PreprocessedData preprocess(const std::vector<ParallelExample>& examples,
                            const PreprocessOptions& opt) {
  if (examples.empty()) throw std::runtime_error("preprocess: no examples");
  PreprocessedData out;

  std::vector<std::string> bpe_lines;
  std::vector<DepSentence> parses;
  for (const auto& ex : examples) {
    ex.source.validate();
    parses.push_back(ex.source);
    std::string src_line, tgt_line;
    for (const auto& w : ex.source.words) src_line += w + " ";
    for (const auto& w : ex.target) tgt_line += w + " ";
    bpe_lines.push_back(src_line);
    bpe_lines.push_back(tgt_line);
  }
  out.bpe = BpeModel::learn(bpe_lines, opt.bpe_merges);
  out.label_vocab = build_label_vocab(parses);

  std::vector<ParallelExample> all =
      opt.multitask ? multitask_augment(examples, opt.seed) : examples;

  std::vector<std::vector<std::string>> src_corpus, tgt_corpus;
  std::vector<std::string> src_pinned, tgt_pinned;
  if (opt.multitask) {
    src_pinned = {kTranslateTag, kParseTag};
    // Parse-structure tokens must never fall to <unk> in the parse task.
    std::set<std::string> structs{"(", ")"};
    for (const auto& p : parses)
      for (const auto& l : p.labels) structs.insert(l);
    tgt_pinned.assign(structs.begin(), structs.end());
  }
  for (const auto& ex : all) {
    SourceTokens st = tokenize_source(ex.source, out.bpe, ex.task_tag);
    src_corpus.push_back(st.tokens);
    tgt_corpus.push_back(ex.task_tag == kParseTag ? bpe_parse_target(out.bpe, ex.target)
                                                  : out.bpe.apply_sentence(ex.target));
  }
  out.src_vocab = Vocabulary::build(src_corpus, opt.min_freq, src_pinned);
  out.tgt_vocab = Vocabulary::build(tgt_corpus, opt.min_freq, tgt_pinned);

  out.records.reserve(all.size());
  for (const auto& ex : all)
    out.records.push_back(make_record(ex, out.bpe, out.src_vocab, out.tgt_vocab, out.label_vocab));
  return out;
}

}  // namespace synmt
