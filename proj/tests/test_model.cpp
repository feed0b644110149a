// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/beam.hpp"
#include "synmt/checkpoint.hpp"
#include "synmt/config.hpp"
#include "synmt/model.hpp"
#include "synmt/train.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

using namespace synmt;

namespace {

TransformerConfig tiny_config(SyntaxMode mode = SyntaxMode::kNone) {
  TransformerConfig c;
  c.layers_enc = 2;
  c.layers_dec = 2;
  c.d_model = 16;
  c.d_ff = 32;
  c.attention.d_model = 16;
  c.attention.heads = 2;
  c.attention.n_pascal = mode == SyntaxMode::kPascal ? 1 : 0;
  c.attention.pascal_layer = 1;
  c.attention.sigma2 = 1.0;
  c.src_vocab = 23;
  c.tgt_vocab = 19;
  c.n_labels = 7;
  c.max_len = 32;
  c.syntax_mode = mode;
  c.sh_label_dim = 4;
  return c;
}

Record tiny_record() {
  Record r;
  r.src_ids = {1, 5, 6, 7, 2};  // BOS a b c EOS
  r.tgt_ids = {1, 4, 8, 2};
  r.parent_middle = {0.0, 2.0, 2.0, 2.0, 4.0};
  r.parent_first = {0, 2, 2, 2, 4};
  r.label_ids = {0, 2, 3, 4, 0};
  return r;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("syntax mode string round trip") {
  for (auto m : {SyntaxMode::kNone, SyntaxMode::kPascal, SyntaxMode::kLisa, SyntaxMode::kMultitask,
                 SyntaxMode::kSh})
    CHECK(syntax_mode_from_string(to_string(m)) == m);
  CHECK_THROWS(syntax_mode_from_string("nope"));
}

TEST_CASE("build_model is deterministic per seed and differs across seeds") {
  auto cfg = tiny_config();
  Model a = build_model(cfg, 3), b = build_model(cfg, 3), c = build_model(cfg, 4);
  REQUIRE(a.params.size() == b.params.size());
  for (size_t i = 0; i < a.params.size(); ++i) {
    CHECK(a.params[i].first == b.params[i].first);
    CHECK((a.params[i].second.value() - b.params[i].second.value()).cwiseAbs().maxCoeff() == 0.0);
  }
  bool any_diff = false;
  for (size_t i = 0; i < a.params.size(); ++i)
    any_diff |= (a.params[i].second.value() - c.params[i].second.value()).cwiseAbs().maxCoeff() > 0;
  CHECK(any_diff);
}

TEST_CASE("pascal mode adds no parameters over the baseline") {
  Model base = build_model(tiny_config(SyntaxMode::kNone), 1);
  Model pascal = build_model(tiny_config(SyntaxMode::kPascal), 1);
  CHECK(base.count_parameters() == pascal.count_parameters());
  REQUIRE(base.params.size() == pascal.params.size());
  for (size_t i = 0; i < base.params.size(); ++i)
    CHECK(base.params[i].first == pascal.params[i].first);
}

TEST_CASE("lisa mode adds only the biaffine head weights") {
  Model base = build_model(tiny_config(SyntaxMode::kNone), 1);
  Model lisa = build_model(tiny_config(SyntaxMode::kLisa), 1);
  CHECK(lisa.count_parameters() > base.count_parameters());
  CHECK(lisa.has("enc0.h0.bilinear"));
  CHECK(lisa.has("enc0.h0.ffq_w"));
  CHECK(!base.has("enc0.h0.bilinear"));
}

TEST_CASE("sh mode adds a label embedding table") {
  auto cfg = tiny_config(SyntaxMode::kSh);
  Model m = build_model(cfg, 1);
  CHECK(m.has("label_embed"));
  CHECK(m.p("label_embed").value().rows() == cfg.n_labels);
  CHECK(m.p("label_embed").value().cols() == cfg.sh_label_dim);
}

TEST_CASE("sh_embed replaces only the last dims") {
  Matrix emb = Matrix::Ones(3, 6) * 2.0;
  Matrix table(2, 2);
  table << 5.0, 6.0, 7.0, 8.0;
  Tensor out = sh_embed(Tensor(emb), Tensor(table), {0, 1, 0});
  CHECK(out.value().rows() == 3);
  CHECK(out.value().cols() == 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) CHECK(out.value()(i, j) == 2.0);
  CHECK(out.value()(0, 4) == 5.0);
  CHECK(out.value()(0, 5) == 6.0);
  CHECK(out.value()(1, 4) == 7.0);
  CHECK(out.value()(2, 5) == 6.0);
}

TEST_CASE("forward_loss of an untrained model is close to uniform entropy") {
  // With random small weights the output distribution is near uniform, so
  // the unsmoothed CE is near log(V). Smoothing shifts it only slightly.
  auto cfg = tiny_config();
  Model m = build_model(cfg, 7);
  auto res = forward_loss(m, {tiny_record()}, 0.0, false);
  CHECK(res.loss.value()(0, 0) == doctest::Approx(std::log(double(cfg.tgt_vocab))).epsilon(0.25));
  CHECK(res.target_tokens == 3);
  CHECK(res.total.value()(0, 0) == res.loss.value()(0, 0));
}

TEST_CASE("forward_loss batch mean is token weighted") {
  auto cfg = tiny_config();
  Model m = build_model(cfg, 7);
  Record a = tiny_record();
  Record b = tiny_record();
  b.tgt_ids = {1, 4, 2};  // shorter target
  auto ra = forward_loss(m, {a}, 0.1, false);
  auto rb = forward_loss(m, {b}, 0.1, false);
  auto rab = forward_loss(m, {a, b}, 0.1, false);
  const double expect = (ra.loss.value()(0, 0) * 3 + rb.loss.value()(0, 0) * 2) / 5.0;
  CHECK(rab.loss.value()(0, 0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rab.target_tokens == 5);
}

TEST_CASE("forward_loss is deterministic in eval mode") {
  Model m = build_model(tiny_config(SyntaxMode::kPascal), 7);
  auto r1 = forward_loss(m, {tiny_record()}, 0.1, false);
  auto r2 = forward_loss(m, {tiny_record()}, 0.1, false);
  CHECK(r1.loss.value()(0, 0) == r2.loss.value()(0, 0));
}

TEST_CASE("lisa forward produces a parse loss and joint total") {
  auto cfg = tiny_config(SyntaxMode::kLisa);
  cfg.lisa_lambda = 0.5;
  Model m = build_model(cfg, 7);
  auto res = forward_loss(m, {tiny_record()}, 0.1, false);
  CHECK(res.parse_loss.value()(0, 0) > 0.0);
  CHECK(res.total.value()(0, 0) ==
        doctest::Approx(res.loss.value()(0, 0) + 0.5 * res.parse_loss.value()(0, 0))
            .epsilon(1e-12));
}

TEST_CASE("backward fills every parameter gradient") {
  for (auto mode : {SyntaxMode::kNone, SyntaxMode::kPascal, SyntaxMode::kLisa, SyntaxMode::kSh}) {
    CAPTURE(to_string(mode));
    Model m = build_model(tiny_config(mode), 11);
    auto res = forward_loss(m, {tiny_record()}, 0.1, false);
    backward(res.total);
    for (auto& [name, t] : m.params) {
      CAPTURE(name);
      // The biaffine head replaces its own wq/wk; those two stay untouched.
      if (mode == SyntaxMode::kLisa && (name == "enc0.h0.wq" || name == "enc0.h0.wk")) continue;
      CHECK(t.grad().size() == t.value().size());
      CHECK(t.grad().allFinite());
    }
  }
}

TEST_CASE("model loss gradient passes grad_check on one weight") {
  // Perturb wq of the first encoder head and compare against central
  // differences of the full loss.
  Model m = build_model(tiny_config(SyntaxMode::kPascal), 13);
  auto rec = tiny_record();
  Tensor& wq = const_cast<Tensor&>(m.p("enc0.h0.wq"));
  auto f = [&](Tensor& x) {
    // grad_check mutates x in place; x aliases the parameter node.
    (void)x;
    return forward_loss(m, {rec}, 0.1, false).total;
  };
  CHECK(grad_check(f, wq) < 1e-5);
}

TEST_CASE("noam schedule values") {
  TrainConfig cfg;
  cfg.lr_max = 0.0007;
  cfg.warmup_steps = 8000;
  CHECK(noam_lr(1, cfg) == doctest::Approx(0.0007 / 8000.0).epsilon(1e-12));
  CHECK(noam_lr(4000, cfg) == doctest::Approx(0.00035).epsilon(1e-12));
  CHECK(noam_lr(8000, cfg) == doctest::Approx(0.0007).epsilon(1e-12));
  CHECK(noam_lr(32000, cfg) == doctest::Approx(0.0007 * 0.5).epsilon(1e-12));
  // Monotone up then down.
  CHECK(noam_lr(7999, cfg) < noam_lr(8000, cfg));
  CHECK(noam_lr(8001, cfg) < noam_lr(8000, cfg));
}

TEST_CASE("adam step reduces loss on a fixed batch") {
  Model m = build_model(tiny_config(), 17);
  AdamOptimizer opt(0.9, 0.98, 1e-9);
  std::vector<Record> batch{tiny_record()};
  double before = forward_loss(m, batch, 0.1, false).loss.value()(0, 0);
  for (int i = 0; i < 30; ++i) {
    m.zero_grads();
    auto res = forward_loss(m, batch, 0.1, false);
    backward(res.total);
    opt.step(m, 1e-2);
  }
  double after = forward_loss(m, batch, 0.1, false).loss.value()(0, 0);
  CHECK(after < before);
  CHECK(opt.steps_taken() == 30);
}

TEST_CASE("training is deterministic and resumable") {
  std::vector<Record> data;
  std::mt19937_64 rng(23);
  for (int i = 0; i < 8; ++i) {
    Record r = tiny_record();
    r.tgt_ids = {1, int32_t(4 + rng() % 10), int32_t(4 + rng() % 10), 2};
    data.push_back(r);
  }
  TrainConfig tc;
  tc.max_steps = 12;
  tc.batch_tokens = 20;
  tc.dropout = 0.1;
  tc.seed = 5;
  tc.log_every = 4;

  Model a = build_model(tiny_config(), 29);
  AdamOptimizer oa(tc.beta1, tc.beta2, tc.adam_eps);
  auto ra = train(a, oa, data, tc);

  Model b = build_model(tiny_config(), 29);
  AdamOptimizer ob(tc.beta1, tc.beta2, tc.adam_eps);
  auto rb = train(b, ob, data, tc);

  CHECK(ra.steps == 12);
  CHECK(ra.final_loss == rb.final_loss);
  for (size_t i = 0; i < a.params.size(); ++i)
    CHECK((a.params[i].second.value() - b.params[i].second.value()).cwiseAbs().maxCoeff() == 0.0);

  // Stop at 6, resume to 12: identical to the straight-through run.
  Model c = build_model(tiny_config(), 29);
  AdamOptimizer oc(tc.beta1, tc.beta2, tc.adam_eps);
  TrainConfig half = tc;
  half.max_steps = 6;
  train(c, oc, data, half);
  train(c, oc, data, tc, /*start_step=*/6);
  for (size_t i = 0; i < a.params.size(); ++i)
    CHECK((a.params[i].second.value() - c.params[i].second.value()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("records round trip bit exactly") {
  std::vector<Record> recs{tiny_record()};
  recs[0].parent_middle[1] = 2.5000000000000004;  // not representable in fewer digits
  Record empty_tail;
  empty_tail.src_ids = {1, 2};
  empty_tail.tgt_ids = {1, 2};
  empty_tail.parent_middle = {0.0, 1.0};
  empty_tail.parent_first = {0, 1};
  empty_tail.label_ids = {0, 0};
  recs.push_back(empty_tail);

  std::stringstream buf;
  write_records(buf, recs);
  auto back = read_records(buf);
  REQUIRE(back.size() == recs.size());
  for (size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].src_ids == recs[i].src_ids);
    CHECK(back[i].tgt_ids == recs[i].tgt_ids);
    CHECK(back[i].parent_first == recs[i].parent_first);
    CHECK(back[i].label_ids == recs[i].label_ids);
    REQUIRE(back[i].parent_middle.size() == recs[i].parent_middle.size());
    for (size_t j = 0; j < recs[i].parent_middle.size(); ++j)
      CHECK(back[i].parent_middle[j] == recs[i].parent_middle[j]);  // bitwise
  }
}

TEST_CASE("read_records rejects a corrupt header") {
  std::stringstream buf("not a record stream");
  CHECK_THROWS(read_records(buf));
}

TEST_CASE("checkpoint round trip is bit exact, optimizer included") {
  auto cfg = tiny_config(SyntaxMode::kPascal);
  Model m = build_model(cfg, 31);
  AdamOptimizer opt(0.9, 0.98, 1e-9);
  std::vector<Record> batch{tiny_record()};
  for (int i = 0; i < 3; ++i) {
    m.zero_grads();
    auto res = forward_loss(m, batch, 0.1, false);
    backward(res.total);
    opt.step(m, 1e-3);
  }

  TempFile tmp("synmt_test_ckpt.bin");
  save_checkpoint(tmp.path, m, "dummy = 1\n", 3, &opt);
  CHECK(read_checkpoint_config(tmp.path) == "dummy = 1\n");

  auto loaded = load_checkpoint(tmp.path, cfg);
  CHECK(loaded.step == 3);
  CHECK(loaded.has_optimizer);
  CHECK(loaded.opt_steps == 3);
  REQUIRE(loaded.model.params.size() == m.params.size());
  for (size_t i = 0; i < m.params.size(); ++i) {
    const Matrix& a = m.params[i].second.value();
    const Matrix& b = loaded.model.params[i].second.value();
    REQUIRE(a.rows() == b.rows());
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) CHECK(a(r, c) == b(r, c));
  }
  REQUIRE(loaded.opt_m.size() == opt.moment1().size());
  for (size_t i = 0; i < loaded.opt_m.size(); ++i)
    CHECK((loaded.opt_m[i] - opt.moment1()[i]).cwiseAbs().maxCoeff() == 0.0);

  // Same forward on both models.
  auto r1 = forward_loss(m, batch, 0.1, false);
  auto r2 = forward_loss(loaded.model, batch, 0.1, false);
  CHECK(r1.loss.value()(0, 0) == r2.loss.value()(0, 0));
}

TEST_CASE("load_checkpoint rejects an architecture mismatch") {
  auto cfg = tiny_config();
  Model m = build_model(cfg, 31);
  TempFile tmp("synmt_test_ckpt2.bin");
  save_checkpoint(tmp.path, m, "", 0);
  auto other = cfg;
  other.d_model = 32;
  other.attention.d_model = 32;
  CHECK_THROWS(load_checkpoint(tmp.path, other));
}

TEST_CASE("length penalty values") {
  CHECK(length_penalty(1, 0.6) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(length_penalty(1, 0.0) == doctest::Approx(1.0));
  CHECK(length_penalty(7, 0.6) == doctest::Approx(std::pow(2.0, 0.6)).epsilon(1e-12));
  CHECK(length_penalty(13, 1.0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("beam size 1 equals greedy decoding") {
  Model m = build_model(tiny_config(), 37);
  Record src = tiny_record();
  DecodeConfig dc;
  dc.beam_size = 1;
  dc.alpha = 0.6;
  dc.max_out_len = 10;
  auto beam = beam_search(m, src, dc);
  auto greedy = greedy_decode(m, src, 10);
  CHECK(beam.ids == greedy.ids);
  CHECK(beam.reached_eos == greedy.reached_eos);
}

TEST_CASE("beam output starts with BOS, excludes PAD, and respects the budget") {
  Model m = build_model(tiny_config(), 41);
  DecodeConfig dc;
  dc.max_out_len = 6;
  auto res = beam_search(m, tiny_record(), dc);
  REQUIRE(!res.ids.empty());
  CHECK(res.ids[0] == 1);
  CHECK(int(res.ids.size()) <= 6 + 2);
  for (size_t i = 1; i < res.ids.size(); ++i) {
    CHECK(res.ids[i] != 0);  // PAD never emitted
    CHECK(res.ids[i] != 1);  // BOS never re-emitted
  }
  if (res.reached_eos) CHECK(res.ids.back() == 2);
}

TEST_CASE("beam search finds EOS on a model trained to emit it") {
  // Train a tiny model to map the fixed source to a fixed 2-token target;
  // the beam should then reach EOS.
  Model m = build_model(tiny_config(), 43);
  AdamOptimizer opt(0.9, 0.98, 1e-9);
  std::vector<Record> batch{tiny_record()};
  for (int i = 0; i < 120; ++i) {
    m.zero_grads();
    auto res = forward_loss(m, batch, 0.0, false);
    backward(res.total);
    opt.step(m, 5e-3);
  }
  DecodeConfig dc;
  auto res = beam_search(m, batch[0], dc);
  CHECK(res.reached_eos);
  CHECK(res.ids == std::vector<int>{1, 4, 8, 2});
}

TEST_CASE("transformer config validation") {
  auto cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.src_vocab = 0;
  CHECK_THROWS(cfg.validate());
  cfg = tiny_config(SyntaxMode::kSh);
  cfg.sh_label_dim = cfg.d_model + 1;
  CHECK_THROWS(cfg.validate());
}
