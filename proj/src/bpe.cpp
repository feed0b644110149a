// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/bpe.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace synmt {

namespace {

const std::string kEow = "</w>";

// Splits a word into UTF-8 codepoint symbols; the last carries the
// end-of-word marker so merges can distinguish word-final symbols.
std::vector<std::string> word_symbols(const std::string& word) {
  std::vector<std::string> syms;
  for (size_t i = 0; i < word.size();) {
    size_t len = 1;
    const unsigned char c = static_cast<unsigned char>(word[i]);
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    len = std::min(len, word.size() - i);
    syms.push_back(word.substr(i, len));
    i += len;
  }
  if (!syms.empty()) syms.back() += kEow;
  return syms;
}

void merge_pair(std::vector<std::string>& syms, const std::string& a, const std::string& b) {
  std::vector<std::string> out;
  out.reserve(syms.size());
  for (size_t i = 0; i < syms.size(); ++i) {
    if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
      out.push_back(a + b);
      ++i;
    } else {
      out.push_back(syms[i]);
    }
  }
  syms = std::move(out);
}

}  // namespace

BpeModel::BpeModel(std::vector<std::pair<std::string, std::string>> merges)
    : merges_(std::move(merges)) {
  for (size_t i = 0; i < merges_.size(); ++i) {
    const std::string key = merges_[i].first + " " + merges_[i].second;
    if (!rank_.emplace(key, static_cast<int>(i)).second)
      throw std::runtime_error("BpeModel: duplicate merge rule '" + key + "'");
  }
}

BpeModel BpeModel::learn(const std::vector<std::string>& lines, int num_merges) {
  std::map<std::vector<std::string>, long> word_counts_sym;
  {
    std::map<std::string, long> word_counts;
    for (const auto& line : lines) {
      std::istringstream in(line);
      std::string w;
      while (in >> w) ++word_counts[w];
    }
    for (const auto& [w, c] : word_counts) word_counts_sym[word_symbols(w)] += c;
  }
  std::vector<std::pair<std::string, std::string>> merges;
  for (int it = 0; it < num_merges; ++it) {
    std::map<std::pair<std::string, std::string>, long> pair_counts;
    for (const auto& [syms, c] : word_counts_sym)
      for (size_t i = 0; i + 1 < syms.size(); ++i)
        pair_counts[{syms[i], syms[i + 1]}] += c;
    if (pair_counts.empty()) break;
    // Highest count, lexicographically smallest pair on ties (std::map order).
    auto best = pair_counts.begin();
    for (auto it2 = pair_counts.begin(); it2 != pair_counts.end(); ++it2)
      if (it2->second > best->second) best = it2;
    if (best->second < 2) break;  // singleton pairs carry no generalization
    merges.push_back(best->first);
    std::map<std::vector<std::string>, long> next;
    for (auto& [syms, c] : word_counts_sym) {
      std::vector<std::string> s = syms;
      merge_pair(s, best->first.first, best->first.second);
      next[s] += c;
    }
    word_counts_sym = std::move(next);
  }
  return BpeModel(std::move(merges));
}

std::vector<std::string> BpeModel::apply(const std::string& word) const {
  if (word.empty()) throw std::runtime_error("BpeModel::apply: empty word");
  std::vector<std::string> syms = word_symbols(word);
  while (syms.size() > 1) {
    int best_rank = -1;
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = rank_.find(syms[i] + " " + syms[i + 1]);
      if (it != rank_.end() && (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank < 0) break;
    const std::string a = syms[best_pos], b = syms[best_pos + 1];
    merge_pair(syms, a, b);
  }
  // Strip the end-of-word marker and mark non-final pieces with "@@".
  std::vector<std::string> out;
  out.reserve(syms.size());
  for (size_t i = 0; i < syms.size(); ++i) {
    std::string s = syms[i];
    if (i + 1 == syms.size() && s.size() >= kEow.size() &&
        s.compare(s.size() - kEow.size(), kEow.size(), kEow) == 0)
      s.erase(s.size() - kEow.size());
    if (i + 1 < syms.size()) s += "@@";
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> BpeModel::apply_sentence(const std::vector<std::string>& words) const {
  std::vector<std::string> out;
  for (const auto& w : words) {
    auto toks = apply(w);
    out.insert(out.end(), toks.begin(), toks.end());
  }
  return out;
}

std::vector<std::string> BpeModel::unapply(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  std::string cur;
  for (const auto& t : tokens) {
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "@@") == 0) {
      cur += t.substr(0, t.size() - 2);
    } else {
      out.push_back(cur + t);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);  // dangling continuation
  return out;
}

std::string BpeModel::save() const {
  std::ostringstream out;
  for (const auto& [a, b] : merges_) out << a << ' ' << b << '\n';
  return out.str();
}

BpeModel BpeModel::load(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> merges;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t sp = line.find(' ');
    if (sp == std::string::npos) throw std::runtime_error("BPE merges: malformed line '" + line + "'");
    merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return BpeModel(std::move(merges));
}

}  // namespace synmt
