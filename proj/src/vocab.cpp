// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/vocab.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace synmt {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<bos>");
  add("<eos>");
  add("<unk>");
}

int Vocabulary::add(const std::string& token) {
  const int id = static_cast<int>(tokens_.size());
  if (!to_id_.emplace(token, id).second)
    throw std::runtime_error("Vocabulary: duplicate token '" + token + "'");
  tokens_.push_back(token);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = to_id_.find(token);
  return it == to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("Vocabulary: id " + std::to_string(id));
  return tokens_[id];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens, bool add_bos_eos) const {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 2);
  if (add_bos_eos) ids.push_back(kBos);
  for (const auto& t : tokens) ids.push_back(id(t));
  if (add_bos_eos) ids.push_back(kEos);
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids, bool strip_special) const {
  std::vector<std::string> out;
  for (int i : ids) {
    if (strip_special && (i == kPad || i == kBos || i == kEos)) continue;
    out.push_back(token(i));
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus, int min_freq,
                             const std::vector<std::string>& pinned) {
  if (min_freq < 1) throw std::runtime_error("Vocabulary::build: min_freq must be >= 1");
  if (corpus.empty()) throw std::runtime_error("Vocabulary::build: empty corpus");
  std::map<std::string, long> counts;
  for (const auto& sent : corpus)
    for (const auto& t : sent) ++counts[t];
  Vocabulary v;
  for (const auto& t : pinned) {
    if (!v.contains(t)) v.add(t);
    counts.erase(t);
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [t, c] : counts)
    if (c >= min_freq) kept.emplace_back(t, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (const auto& [t, c] : kept) v.add(t);
  return v;
}

std::string Vocabulary::save() const {
  std::ostringstream out;
  for (int i = 4; i < size(); ++i) out << tokens_[i] << '\n';
  return out.str();
}

Vocabulary Vocabulary::load(const std::string& text) {
  Vocabulary v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) v.add(line);
  }
  return v;
}

}  // namespace synmt
