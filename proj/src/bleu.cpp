// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace synmt {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// The 13a punctuation class: everything split unconditionally. Period,
// comma and hyphen are handled by the digit-context rules below.
bool is_split_punct(char c) {
  return (c >= '{' && c <= '~') || (c >= '[' && c <= '`') || (c >= ' ' && c <= '&') ||
         (c >= '(' && c <= '+') || (c >= ':' && c <= '@') || c == '/';
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::vector<std::string> tokenize_13a(const std::string& line) {
  std::string s = line;
  replace_all(s, "<skipped>", "");
  replace_all(s, "-\n", "");
  replace_all(s, "\n", " ");
  replace_all(s, "&quot;", "\"");
  replace_all(s, "&amp;", "&");
  replace_all(s, "&lt;", "<");
  replace_all(s, "&gt;", ">");

  std::string t = " ";
  for (char c : s) {
    if (c != ' ' && is_split_punct(c)) {
      t += ' ';
      t += c;
      t += ' ';
    } else {
      t += c;
    }
  }
  t += ' ';

  std::string u;
  for (size_t i = 1; i + 1 < t.size() + 1; ++i) {
    const char c = t[i];
    const char prev = t[i - 1];
    const char next = i + 1 < t.size() ? t[i + 1] : ' ';
    if ((c == '.' || c == ',') && (!is_digit(prev) || !is_digit(next))) {
      u += ' ';
      u += c;
      u += ' ';
    } else if (c == '-' && is_digit(prev)) {
      u += ' ';
      u += c;
      u += ' ';
    } else {
      u += c;
    }
  }

  std::vector<std::string> tokens;
  std::istringstream in(u);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, long>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

}  // namespace

std::string BleuReport::to_tsv() const {
  std::ostringstream out;
  out << "bleu\tp1\tp2\tp3\tp4\tbp\thyp_len\tref_len\n";
  out.precision(10);
  out << score << '\t' << precisions[0] << '\t' << precisions[1] << '\t' << precisions[2] << '\t'
      << precisions[3] << '\t' << brevity_penalty << '\t' << hyp_length << '\t' << ref_length
      << '\n';
  return out.str();
}

BleuReport bleu_13a(const std::vector<std::string>& hypotheses,
                    const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size())
    throw std::runtime_error("bleu_13a: hypothesis/reference count mismatch: " +
                             std::to_string(hypotheses.size()) + " vs " +
                             std::to_string(references.size()));
  if (hypotheses.empty()) throw std::runtime_error("bleu_13a: empty corpus");

  long matched[4] = {0, 0, 0, 0};
  long total[4] = {0, 0, 0, 0};
  BleuReport r;
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = tokenize_13a(hypotheses[i]);
    const auto ref = tokenize_13a(references[i]);
    r.hyp_length += static_cast<long>(hyp.size());
    r.ref_length += static_cast<long>(ref.size());
    for (int n = 1; n <= 4; ++n) {
      const auto hc = count_ngrams(hyp, n);
      const auto rc = count_ngrams(ref, n);
      for (const auto& [ng, c] : hc) {
        total[n - 1] += c;
        auto it = rc.find(ng);
        if (it != rc.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }
  r.brevity_penalty =
      r.hyp_length >= r.ref_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length));
  double log_sum = 0.0;
  bool any_zero = false;
  for (int n = 0; n < 4; ++n) {
    r.precisions[n] =
        total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    if (r.precisions[n] == 0.0)
      any_zero = true;
    else
      log_sum += std::log(r.precisions[n]);
  }
  r.score = any_zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

LengthBucketReport length_bucket_report(
    const std::map<std::string, std::vector<std::string>>& systems,
    const std::vector<std::string>& references, const std::vector<int>& source_lens,
    const std::vector<int>& bucket_upper_bounds, const std::string& baseline) {
  if (systems.count(baseline) == 0)
    throw std::runtime_error("length_bucket_report: unknown baseline '" + baseline + "'");
  for (const auto& [name, hyps] : systems)
    if (hyps.size() != references.size())
      throw std::runtime_error("length_bucket_report: corpus size mismatch for '" + name + "'");
  if (source_lens.size() != references.size())
    throw std::runtime_error("length_bucket_report: source length count mismatch");

  LengthBucketReport rep;
  rep.upper_bounds = bucket_upper_bounds;
  rep.baseline = baseline;
  const size_t n_buckets = bucket_upper_bounds.size() + 1;
  std::vector<std::vector<size_t>> members(n_buckets);
  for (size_t i = 0; i < source_lens.size(); ++i) {
    size_t b = 0;
    while (b < bucket_upper_bounds.size() && source_lens[i] > bucket_upper_bounds[b]) ++b;
    members[b].push_back(i);
  }

  for (size_t b = 0; b < n_buckets; ++b) {
    LengthBucketReport::Bucket bucket;
    if (b == 0)
      bucket.label = "<=" + std::to_string(bucket_upper_bounds.empty() ? 0 : bucket_upper_bounds[0]);
    else if (b < bucket_upper_bounds.size())
      bucket.label = std::to_string(bucket_upper_bounds[b - 1] + 1) + "-" +
                     std::to_string(bucket_upper_bounds[b]);
    else
      bucket.label = ">" + std::to_string(bucket_upper_bounds.back());
    bucket.count = static_cast<long>(members[b].size());
    bucket.percent = 100.0 * static_cast<double>(bucket.count) /
                     static_cast<double>(references.size());
    std::optional<double> base_bleu;
    for (const auto& [name, hyps] : systems) {
      if (members[b].empty()) {
        bucket.bleu[name] = std::nullopt;  // absent, not zero
        continue;
      }
      std::vector<std::string> h, r;
      for (size_t i : members[b]) {
        h.push_back(hyps[i]);
        r.push_back(references[i]);
      }
      bucket.bleu[name] = bleu_13a(h, r).score;
    }
    if (!members[b].empty()) base_bleu = bucket.bleu.at(baseline);
    for (const auto& [name, score] : bucket.bleu)
      bucket.delta[name] = (score && base_bleu) ? std::optional<double>(*score - *base_bleu)
                                                : std::nullopt;
    rep.buckets.push_back(std::move(bucket));
  }
  return rep;
}

std::string LengthBucketReport::to_tsv() const {
  std::ostringstream out;
  out << "bucket\tcount\tpercent";
  std::vector<std::string> names;
  if (!buckets.empty())
    for (const auto& [name, s] : buckets[0].bleu) names.push_back(name);
  for (const auto& n : names) out << '\t' << n << "\tdelta_" << n;
  out << '\n';
  out.precision(6);
  for (const auto& b : buckets) {
    out << b.label << '\t' << b.count << '\t' << b.percent;
    for (const auto& n : names) {
      const auto& s = b.bleu.at(n);
      const auto& d = b.delta.at(n);
      out << '\t' << (s ? std::to_string(*s) : "-") << '\t' << (d ? std::to_string(*d) : "-");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace synmt
