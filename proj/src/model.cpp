// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/model.hpp"

#include "synmt/vocab.hpp"

#include <cmath>
#include <stdexcept>

namespace synmt {

std::string to_string(SyntaxMode m) {
  switch (m) {
    case SyntaxMode::kNone: return "none";
    case SyntaxMode::kPascal: return "pascal";
    case SyntaxMode::kLisa: return "lisa";
    case SyntaxMode::kMultitask: return "multitask";
    case SyntaxMode::kSh: return "sh";
  }
  throw ConfigError("unknown syntax mode");
}

SyntaxMode syntax_mode_from_string(const std::string& s) {
  if (s == "none") return SyntaxMode::kNone;
  if (s == "pascal") return SyntaxMode::kPascal;
  if (s == "lisa") return SyntaxMode::kLisa;
  if (s == "multitask") return SyntaxMode::kMultitask;
  if (s == "sh") return SyntaxMode::kSh;
  throw ConfigError("unknown syntax mode '" + s + "'");
}

void TransformerConfig::validate() const {
  attention.validate();
  if (attention.d_model != d_model) throw ConfigError("attention.d_model must equal d_model");
  if (layers_enc < 1 || layers_dec < 1) throw ConfigError("need at least one layer per side");
  if (attention.pascal_layer < 1 || attention.pascal_layer > layers_enc)
    throw ConfigError("pascal_layer out of range");
  if (src_vocab < 5 || tgt_vocab < 5) throw ConfigError("vocabularies must include reserved ids");
  if (syntax_mode == SyntaxMode::kSh) {
    if (sh_label_dim >= d_model) throw ConfigError("sh_label_dim must be < d_model");
    if (n_labels < 1) throw ConfigError("S&H mode requires a label vocabulary");
  }
  if (max_len < 2) throw ConfigError("max_len too small");
}

const Tensor& Model::p(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw std::runtime_error("Model: unknown parameter '" + name + "'");
}

bool Model::has(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return true;
  return false;
}

long Model::count_parameters() const {
  long total = 0;
  for (const auto& [n, t] : params) total += static_cast<long>(t.value().size());
  return total;
}

void Model::zero_grads() {
  for (auto& [n, t] : params) const_cast<Tensor&>(t).zero_grad();
}

namespace {

Matrix sinusoidal_encoding(int max_len, int d_model) {
  Matrix pe(max_len, d_model);
  for (int pos = 0; pos < max_len; ++pos)
    for (int i = 0; i < d_model; ++i) {
      const double angle = pos / std::pow(10000.0, 2.0 * (i / 2) / d_model);
      pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

class Builder {
 public:
  Builder(Model& m, std::uint64_t seed) : m_(m), rng_(seed) {}

  void glorot(const std::string& name, int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    Matrix w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = u(rng_);
    m_.params.emplace_back(name, Tensor(std::move(w), true));
  }
  void constant(const std::string& name, int rows, int cols, double v) {
    m_.params.emplace_back(name, Tensor(Matrix::Constant(rows, cols, v), true));
  }

 private:
  Model& m_;
  std::mt19937_64 rng_;
};

bool layer_has_lisa(const TransformerConfig& cfg, int layer /*0-based*/) {
  return cfg.syntax_mode == SyntaxMode::kLisa && layer == cfg.attention.pascal_layer - 1;
}

struct DropCtx {
  bool training = false;
  double p = 0.0;
  std::mt19937_64* rng = nullptr;

  Tensor apply(const Tensor& x) const {
    if (!training || p <= 0.0) return x;
    if (!rng) throw ConfigError("dropout requires an rng");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix keep(x.rows(), x.cols());
    const double scale = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) keep(i, j) = u(*rng) < p ? 0.0 : scale;
    return dropout_mask(x, keep);
  }
};

Tensor sublayer(const Tensor& x, const Tensor& out, const Model& m, const std::string& ln,
                const DropCtx& drop) {
  return layer_norm(add(x, drop.apply(out)), m.p(ln + "_g"), m.p(ln + "_b"));
}

Tensor ffn(const Model& m, const std::string& prefix, const Tensor& x, const DropCtx& drop) {
  Tensor h = relu(add_rowvec(matmul(x, m.p(prefix + ".w1")), m.p(prefix + ".b1")));
  Tensor out = add_rowvec(matmul(h, m.p(prefix + ".w2")), m.p(prefix + ".b2"));
  return sublayer(x, out, m, prefix + ".ln2", drop);
}

// Generic attention sublayer with separate query and key/value inputs.
Tensor cross_attention(const Model& m, const std::string& prefix, const Tensor& q_in,
                       const Tensor& kv_in, const BoolMatrix* mask, const DropCtx& drop) {
  const int H = m.cfg.attention.heads;
  std::vector<Tensor> heads;
  for (int h = 0; h < H; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    Tensor S = scaled_scores(matmul(q_in, m.p(hp + ".wq")), matmul(kv_in, m.p(hp + ".wk")));
    Tensor A = softmax_rows(S, mask);
    if (drop.training && drop.p > 0.0) A = drop.apply(A);
    heads.push_back(matmul(A, matmul(kv_in, m.p(hp + ".wv"))));
  }
  return add_rowvec(matmul(concat_cols(heads), m.p(prefix + ".wo")), m.p(prefix + ".ob"));
}

}  // namespace

Model build_model(const TransformerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  m.pos_encoding = sinusoidal_encoding(cfg.max_len, cfg.d_model);
  Builder b(m, seed);
  const int d = cfg.d_model / cfg.attention.heads;

  b.glorot("src_embed", cfg.src_vocab, cfg.d_model);
  b.glorot("tgt_embed", cfg.tgt_vocab, cfg.d_model);
  if (cfg.syntax_mode == SyntaxMode::kSh) b.glorot("label_embed", cfg.n_labels, cfg.sh_label_dim);

  for (int l = 0; l < cfg.layers_enc; ++l) {
    const std::string lp = "enc" + std::to_string(l);
    for (int h = 0; h < cfg.attention.heads; ++h) {
      const std::string hp = lp + ".h" + std::to_string(h);
      b.glorot(hp + ".wq", cfg.d_model, d);
      b.glorot(hp + ".wk", cfg.d_model, d);
      b.glorot(hp + ".wv", cfg.d_model, d);
      if (layer_has_lisa(cfg, l) && h == 0) {
        b.glorot(hp + ".ffq_w", cfg.d_model, d);
        b.constant(hp + ".ffq_b", 1, d, 0.0);
        b.glorot(hp + ".ffk_w", cfg.d_model, d);
        b.constant(hp + ".ffk_b", 1, d, 0.0);
        b.glorot(hp + ".bilinear", d, d);
      }
    }
    b.glorot(lp + ".wo", cfg.d_model, cfg.d_model);
    b.constant(lp + ".ob", 1, cfg.d_model, 0.0);
    b.constant(lp + ".ln1_g", 1, cfg.d_model, 1.0);
    b.constant(lp + ".ln1_b", 1, cfg.d_model, 0.0);
    b.glorot(lp + ".w1", cfg.d_model, cfg.d_ff);
    b.constant(lp + ".b1", 1, cfg.d_ff, 0.0);
    b.glorot(lp + ".w2", cfg.d_ff, cfg.d_model);
    b.constant(lp + ".b2", 1, cfg.d_model, 0.0);
    b.constant(lp + ".ln2_g", 1, cfg.d_model, 1.0);
    b.constant(lp + ".ln2_b", 1, cfg.d_model, 0.0);
  }

  for (int l = 0; l < cfg.layers_dec; ++l) {
    const std::string lp = "dec" + std::to_string(l);
    for (const char* sub : {".self", ".x"}) {
      for (int h = 0; h < cfg.attention.heads; ++h) {
        const std::string hp = lp + sub + ".h" + std::to_string(h);
        b.glorot(hp + ".wq", cfg.d_model, d);
        b.glorot(hp + ".wk", cfg.d_model, d);
        b.glorot(hp + ".wv", cfg.d_model, d);
      }
      b.glorot(lp + sub + ".wo", cfg.d_model, cfg.d_model);
      b.constant(lp + sub + ".ob", 1, cfg.d_model, 0.0);
    }
    b.constant(lp + ".ln1_g", 1, cfg.d_model, 1.0);
    b.constant(lp + ".ln1_b", 1, cfg.d_model, 0.0);
    b.constant(lp + ".lnx_g", 1, cfg.d_model, 1.0);
    b.constant(lp + ".lnx_b", 1, cfg.d_model, 0.0);
    b.glorot(lp + ".w1", cfg.d_model, cfg.d_ff);
    b.constant(lp + ".b1", 1, cfg.d_ff, 0.0);
    b.glorot(lp + ".w2", cfg.d_ff, cfg.d_model);
    b.constant(lp + ".b2", 1, cfg.d_model, 0.0);
    b.constant(lp + ".ln2_g", 1, cfg.d_model, 1.0);
    b.constant(lp + ".ln2_b", 1, cfg.d_model, 0.0);
  }

  if (!cfg.tie_embeddings) b.glorot("out_w", cfg.d_model, cfg.tgt_vocab);
  b.constant("out_b", 1, cfg.tgt_vocab, 0.0);
  return m;
}

Tensor sh_embed(const Tensor& token_emb, const Tensor& label_table,
                const std::vector<int>& label_ids) {
  const Eigen::Index d_model = token_emb.cols();
  const Eigen::Index label_dim = label_table.cols();
  if (label_dim >= d_model) throw ConfigError("sh_embed: label dim must be < d_model");
  Tensor kept = slice_cols(token_emb, 0, d_model - label_dim);
  Tensor labels = embed_rows(label_table, label_ids);
  return concat_cols({kept, labels});
}

namespace {

std::vector<int> to_int(const std::vector<std::int32_t>& v) {
  return std::vector<int>(v.begin(), v.end());
}

Tensor embed_with_positions(const Model& m, const std::string& table,
                            const std::vector<int>& ids, const DropCtx& drop,
                            const std::vector<int>* label_ids) {
  const int T = static_cast<int>(ids.size());
  if (T > m.cfg.max_len) throw ConfigError("sequence longer than max_len");
  Tensor x = embed_rows(m.p(table), ids);
  if (label_ids) x = sh_embed(x, m.p("label_embed"), *label_ids);
  x = scale(x, std::sqrt(static_cast<double>(m.cfg.d_model)));
  x = add_const(x, m.pos_encoding.topRows(T));
  return drop.apply(x);
}

struct EncodeResult {
  Tensor output;
  Tensor parse_loss;  // valid only in LISA mode
};

EncodeResult encode_impl(const Model& m, const Record& rec, const DropCtx& drop) {
  const TransformerConfig& cfg = m.cfg;
  const std::vector<int> src = to_int(rec.src_ids);
  const int T = static_cast<int>(src.size());

  // Exclude padding columns from every encoder attention row.
  BoolMatrix mask;
  bool has_pad = false;
  for (int id : src) has_pad = has_pad || id == Vocabulary::kPad;
  if (has_pad) {
    mask = BoolMatrix::Constant(T, T, true);
    for (int j = 0; j < T; ++j)
      if (src[j] == Vocabulary::kPad) mask.col(j).setConstant(false);
  }
  const BoolMatrix* mask_ptr = has_pad ? &mask : nullptr;

  std::vector<int> labels;
  if (cfg.syntax_mode == SyntaxMode::kSh) {
    if (static_cast<int>(rec.label_ids.size()) != T)
      throw DimensionError("label vector length != T");
    labels = to_int(rec.label_ids);
  }
  Tensor x = embed_with_positions(m, "src_embed", src, drop,
                                  cfg.syntax_mode == SyntaxMode::kSh ? &labels : nullptr);

  Tensor parse_loss;
  for (int l = 0; l < cfg.layers_enc; ++l) {
    const std::string lp = "enc" + std::to_string(l);
    const bool pascal_layer =
        cfg.syntax_mode == SyntaxMode::kPascal && l == cfg.attention.pascal_layer - 1;
    std::vector<Tensor> heads;
    for (int h = 0; h < cfg.attention.heads; ++h) {
      const std::string hp = lp + ".h" + std::to_string(h);
      HeadWeights w{m.p(hp + ".wq"), m.p(hp + ".wk"), m.p(hp + ".wv")};
      HeadContext ctx{mask_ptr, drop.training, drop.p, drop.rng};
      if (pascal_layer && h < cfg.attention.n_pascal) {
        if (static_cast<int>(rec.parent_middle.size()) != T)
          throw DimensionError("parent vector length != T");
        heads.push_back(pascal_head_forward(x, rec.parent_middle, cfg.attention, w, ctx));
      } else if (layer_has_lisa(cfg, l) && h == 0) {
        BiaffineWeights bw{m.p(hp + ".ffq_w"), m.p(hp + ".ffq_b"), m.p(hp + ".ffk_w"),
                           m.p(hp + ".ffk_b"), m.p(hp + ".bilinear")};
        if (static_cast<int>(rec.parent_first.size()) != T)
          throw DimensionError("first-subword parent vector length != T");
        auto res = lisa_head_forward(x, to_int(rec.parent_first), w, bw, ctx);
        heads.push_back(res.output);
        parse_loss = res.parse_loss;
      } else {
        heads.push_back(standard_head_forward(x, w, ctx));
      }
    }
    Tensor attn_out =
        add_rowvec(matmul(concat_cols(heads), m.p(lp + ".wo")), m.p(lp + ".ob"));
    x = sublayer(x, attn_out, m, lp + ".ln1", drop);
    x = ffn(m, lp, x, drop);
  }
  return {x, parse_loss};
}

Tensor decode_states(const Model& m, const Tensor& enc_out, const std::vector<int>& tgt_in,
                     const DropCtx& drop) {
  const TransformerConfig& cfg = m.cfg;
  const int T = static_cast<int>(tgt_in.size());
  BoolMatrix causal(T, T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j) causal(i, j) = j <= i;

  Tensor x = embed_with_positions(m, "tgt_embed", tgt_in, drop, nullptr);
  for (int l = 0; l < cfg.layers_dec; ++l) {
    const std::string lp = "dec" + std::to_string(l);
    Tensor self_out = cross_attention(m, lp + ".self", x, x, &causal, drop);
    x = sublayer(x, self_out, m, lp + ".ln1", drop);
    Tensor cross_out = cross_attention(m, lp + ".x", x, enc_out, nullptr, drop);
    x = sublayer(x, cross_out, m, lp + ".lnx", drop);
    x = ffn(m, lp, x, drop);
  }
  return x;
}

Tensor output_logits(const Model& m, const Tensor& dec_states) {
  Tensor proj = m.cfg.tie_embeddings ? matmul(dec_states, transpose(m.p("tgt_embed")))
                                     : matmul(dec_states, m.p("out_w"));
  return add_rowvec(proj, m.p("out_b"));
}

}  // namespace

ForwardResult forward_loss(const Model& model, const std::vector<Record>& batch,
                           double label_smoothing, bool training, double dropout,
                           std::mt19937_64* rng) {
  if (batch.empty()) throw std::runtime_error("forward_loss: empty batch");
  DropCtx drop{training, dropout, rng};
  long total_tokens = 0;
  for (const auto& rec : batch) {
    if (rec.tgt_ids.size() < 2) throw std::runtime_error("forward_loss: target too short");
    for (size_t i = 1; i < rec.tgt_ids.size(); ++i)
      if (rec.tgt_ids[i] != Vocabulary::kPad) ++total_tokens;
  }
  Tensor loss, parse;
  for (const auto& rec : batch) {
    EncodeResult enc = encode_impl(model, rec, drop);
    std::vector<int> tgt_in(rec.tgt_ids.begin(), rec.tgt_ids.end() - 1);
    std::vector<int> tgt_out(rec.tgt_ids.begin() + 1, rec.tgt_ids.end());
    std::vector<bool> row_mask(tgt_out.size());
    long n = 0;
    for (size_t i = 0; i < tgt_out.size(); ++i) {
      row_mask[i] = tgt_out[i] != Vocabulary::kPad;
      if (row_mask[i]) ++n;
    }
    Tensor logits = output_logits(model, decode_states(model, enc.output, tgt_in, drop));
    Tensor ce = cross_entropy_smoothed(logits, tgt_out, label_smoothing, &row_mask);
    // Token-mean across the whole batch: weight each sentence mean by its
    // unmasked token count.
    Tensor weighted = scale(ce, static_cast<double>(n) / static_cast<double>(total_tokens));
    loss = loss.valid() ? add(loss, weighted) : weighted;
    if (enc.parse_loss.valid()) {
      Tensor pw = scale(enc.parse_loss, 1.0 / static_cast<double>(batch.size()));
      parse = parse.valid() ? add(parse, pw) : pw;
    }
  }
  ForwardResult res;
  res.loss = loss;
  res.target_tokens = total_tokens;
  if (parse.valid()) {
    res.parse_loss = parse;
    res.total = add(loss, scale(parse, model.cfg.lisa_lambda));
  } else {
    res.total = loss;
  }
  return res;
}

Tensor encode(const Model& model, const Record& rec, bool training, double dropout,
              std::mt19937_64* rng) {
  DropCtx drop{training, dropout, rng};
  return encode_impl(model, rec, drop).output;
}

Matrix teacher_forced_logits(const Model& model, const Tensor& enc_out,
                             const std::vector<int>& tgt_in) {
  DropCtx drop;  // inference
  return output_logits(model, decode_states(model, enc_out, tgt_in, drop)).value();
}

Eigen::RowVectorXd next_token_logprobs(const Model& model, const Tensor& enc_out,
                                       const std::vector<int>& tgt_prefix) {
  DropCtx drop;  // inference
  Tensor logits = output_logits(model, decode_states(model, enc_out, tgt_prefix, drop));
  Eigen::RowVectorXd row = logits.value().row(logits.rows() - 1);
  const double mx = row.maxCoeff();
  const double lse = mx + std::log((row.array() - mx).exp().sum());
  return row.array() - lse;
}

}  // namespace synmt
