// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/beam.hpp"

#include "synmt/vocab.hpp"

#include <algorithm>
#include <cmath>

namespace synmt {

double length_penalty(int len, double alpha) {
  return std::pow((5.0 + len) / 6.0, alpha);
}

namespace {

struct Hypothesis {
  std::vector<int> ids;  // starts at BOS
  double sum_logprob = 0.0;
};

}  // namespace

DecodeResult beam_search(const Model& model, const Record& src, const DecodeConfig& cfg) {
  cfg.validate();
  Tensor enc = encode(model, src);
  std::vector<Hypothesis> beams{{{Vocabulary::kBos}, 0.0}};
  std::vector<Hypothesis> finished;

  for (int step_i = 0; step_i < cfg.max_out_len && !beams.empty(); ++step_i) {
    // (sum_logprob, beam, token), ordered best-first with index tie-breaks.
    std::vector<std::tuple<double, size_t, int>> cands;
    for (size_t b = 0; b < beams.size(); ++b) {
      Eigen::RowVectorXd lp = next_token_logprobs(model, enc, beams[b].ids);
      for (int v = 0; v < lp.size(); ++v) {
        if (v == Vocabulary::kPad || v == Vocabulary::kBos) continue;
        cands.emplace_back(beams[b].sum_logprob + lp(v), b, v);
      }
    }
    std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    std::vector<Hypothesis> next;
    for (const auto& [score, b, v] : cands) {
      if (static_cast<int>(next.size() + finished.size()) >= cfg.beam_size &&
          static_cast<int>(next.size()) >= cfg.beam_size)
        break;
      Hypothesis h = beams[b];
      h.ids.push_back(v);
      h.sum_logprob = score;
      if (v == Vocabulary::kEos) {
        finished.push_back(std::move(h));
      } else if (static_cast<int>(next.size()) < cfg.beam_size) {
        next.push_back(std::move(h));
      }
      if (static_cast<int>(next.size()) >= cfg.beam_size &&
          static_cast<int>(finished.size()) >= cfg.beam_size)
        break;
    }
    beams = std::move(next);
    if (static_cast<int>(finished.size()) >= cfg.beam_size) break;
  }

  auto normalized = [&cfg](const Hypothesis& h) {
    // Generated length excludes BOS.
    return h.sum_logprob / length_penalty(static_cast<int>(h.ids.size()) - 1, cfg.alpha);
  };
  DecodeResult res;
  if (!finished.empty()) {
    const auto* best = &finished[0];
    for (const auto& h : finished)
      if (normalized(h) > normalized(*best)) best = &h;
    res.ids = best->ids;
    res.reached_eos = true;
    res.score = normalized(*best);
  } else {
    const auto* best = &beams[0];
    for (const auto& h : beams)
      if (normalized(h) > normalized(*best)) best = &h;
    res.ids = best->ids;
    res.reached_eos = false;
    res.score = normalized(*best);
  }
  return res;
}

DecodeResult greedy_decode(const Model& model, const Record& src, int max_out_len) {
  Tensor enc = encode(model, src);
  DecodeResult res;
  res.ids = {Vocabulary::kBos};
  double sum_lp = 0.0;
  for (int i = 0; i < max_out_len; ++i) {
    Eigen::RowVectorXd lp = next_token_logprobs(model, enc, res.ids);
    int best = -1;
    for (int v = 0; v < lp.size(); ++v) {
      if (v == Vocabulary::kPad || v == Vocabulary::kBos) continue;
      if (best < 0 || lp(v) > lp(best)) best = v;
    }
    res.ids.push_back(best);
    sum_lp += lp(best);
    if (best == Vocabulary::kEos) {
      res.reached_eos = true;
      break;
    }
  }
  res.score = sum_lp / length_penalty(static_cast<int>(res.ids.size()) - 1, /*alpha=*/0.0);
  return res;
}

}  // namespace synmt
