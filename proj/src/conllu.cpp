// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/conllu.hpp"

#include <sstream>

namespace synmt {

void DepSentence::validate() const {
  const size_t n = words.size();
  if (heads.size() != n || labels.size() != n)
    throw ParseError("DepSentence: field lengths disagree");
  if (n == 0) throw ParseError("DepSentence: empty sentence");
  int roots = 0;
  for (size_t i = 0; i < n; ++i) {
    if (heads[i] < 0 || heads[i] > static_cast<int>(n))
      throw ParseError("DepSentence: head index " + std::to_string(heads[i]) + " out of range");
    if (heads[i] == 0) ++roots;
  }
  if (roots != 1) throw ParseError("DepSentence: expected exactly one root, got " + std::to_string(roots));
  // Walk up from each word; a chain longer than n means a cycle.
  for (size_t i = 0; i < n; ++i) {
    int cur = static_cast<int>(i) + 1;
    for (size_t steps = 0; cur != 0; ++steps) {
      if (steps > n) throw ParseError("DepSentence: cyclic heads involving word " + std::to_string(i + 1));
      cur = heads[cur - 1];
    }
  }
}

std::vector<DepSentence> parse_conllu(const std::string& text) {
  std::vector<DepSentence> out;
  DepSentence cur;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  auto flush = [&]() {
    if (!cur.words.empty()) {
      cur.validate();
      out.push_back(std::move(cur));
      cur = DepSentence{};
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() < 8)
      throw ParseError("line " + std::to_string(lineno) + ": expected 10 tab-separated columns");
    const std::string& id = cols[0];
    // Multiword token ranges ("1-2") and empty nodes ("5.1") carry no arc.
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    int head;
    try {
      size_t pos = 0;
      head = std::stoi(cols[6], &pos);
      if (pos != cols[6].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": non-integer HEAD '" + cols[6] + "'");
    }
    cur.words.push_back(cols[1]);
    cur.heads.push_back(head);
    cur.labels.push_back(cols[7]);
  }
  flush();
  return out;
}

std::string serialize_conllu(const std::vector<DepSentence>& sentences) {
  std::ostringstream out;
  for (const auto& s : sentences) {
    for (size_t i = 0; i < s.words.size(); ++i) {
      out << (i + 1) << '\t' << s.words[i] << "\t_\t_\t_\t_\t" << s.heads[i] << '\t'
          << s.labels[i] << "\t_\t_\n";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

void linearize_node(const DepSentence& s, int word,  // 0-based
                    const std::vector<std::vector<int>>& children,
                    std::vector<std::string>& out) {
  out.push_back("(");
  out.push_back(s.labels[word]);
  out.push_back(s.words[word]);
  for (int c : children[word]) linearize_node(s, c, children, out);
  out.push_back(")");
}

}  // namespace

std::vector<std::string> linearize_parse(const DepSentence& s) {
  s.validate();
  std::vector<std::vector<int>> children(s.size());
  int root = -1;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.heads[i] == 0)
      root = static_cast<int>(i);
    else
      children[s.heads[i] - 1].push_back(static_cast<int>(i));
  }
  std::vector<std::string> out;
  linearize_node(s, root, children, out);
  return out;
}

}  // namespace synmt
