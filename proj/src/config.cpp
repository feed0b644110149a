// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace synmt {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KVConfig KVConfig::parse(const std::string& text) {
  KVConfig kv;
  std::istringstream in(text);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv.values_[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

KVConfig KVConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void KVConfig::apply_override(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must be key=value: '" + assignment + "'");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string KVConfig::get_str(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int KVConfig::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(get_long(key, fallback));
}

long KVConfig::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  size_t pos = 0;
  long v;
  try {
    v = std::stol(it->second, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
  }
  if (pos != it->second.size())
    throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
  return v;
}

double KVConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  size_t pos = 0;
  double v;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
  }
  if (pos != it->second.size())
    throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
  return v;
}

bool KVConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + it->second + "'");
}

std::string KVConfig::to_text() const {
  // std::map iteration is already sorted; group by section prefix.
  std::ostringstream out;
  std::string cur_section;
  bool first = true;
  for (const auto& [key, value] : values_) {
    const size_t dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != cur_section || first) {
      if (!first) out << '\n';
      if (!section.empty()) out << '[' << section << "]\n";
      cur_section = section;
      first = false;
    }
    out << name << '=' << value << '\n';
  }
  return out.str();
}

TransformerConfig transformer_config_from(const KVConfig& kv) {
  TransformerConfig cfg;
  cfg.layers_enc = kv.get_int("model.layers_enc", cfg.layers_enc);
  cfg.layers_dec = kv.get_int("model.layers_dec", cfg.layers_dec);
  cfg.d_model = kv.get_int("model.d_model", cfg.d_model);
  cfg.d_ff = kv.get_int("model.d_ff", cfg.d_ff);
  cfg.src_vocab = kv.get_int("model.src_vocab", cfg.src_vocab);
  cfg.tgt_vocab = kv.get_int("model.tgt_vocab", cfg.tgt_vocab);
  cfg.n_labels = kv.get_int("model.n_labels", cfg.n_labels);
  cfg.max_len = kv.get_int("model.max_len", cfg.max_len);
  cfg.syntax_mode = syntax_mode_from_string(kv.get_str("model.syntax_mode", "none"));
  cfg.sh_label_dim = kv.get_int("model.sh_label_dim", cfg.sh_label_dim);
  cfg.lisa_lambda = kv.get_double("model.lisa_lambda", cfg.lisa_lambda);
  cfg.tie_embeddings = kv.get_bool("model.tie_embeddings", cfg.tie_embeddings);

  cfg.attention.d_model = cfg.d_model;
  cfg.attention.heads = kv.get_int("attention.heads", cfg.attention.heads);
  cfg.attention.n_pascal = kv.get_int("attention.n_pascal", cfg.attention.n_pascal);
  cfg.attention.pascal_layer = kv.get_int("attention.pascal_layer", cfg.attention.pascal_layer);
  cfg.attention.sigma2 = kv.get_double("attention.sigma2", cfg.attention.sigma2);
  cfg.attention.parent_ignore_q = kv.get_double("attention.parent_ignore_q", 0.0);
  const std::string combine = kv.get_str("attention.combine_mode", "multiply");
  if (combine == "multiply")
    cfg.attention.combine_mode = CombineMode::kMultiply;
  else if (combine == "add")
    cfg.attention.combine_mode = CombineMode::kAdd;
  else
    throw ConfigError("attention.combine_mode must be multiply or add");
  const std::string pm = kv.get_str("attention.parent_mode", "gaussian");
  if (pm == "gaussian")
    cfg.attention.parent_mode = ParentMode::kGaussian;
  else if (pm == "parent_only")
    cfg.attention.parent_mode = ParentMode::kParentOnly;
  else
    throw ConfigError("attention.parent_mode must be gaussian or parent_only");
  return cfg;
}

TrainConfig train_config_from(const KVConfig& kv) {
  TrainConfig cfg;
  cfg.lr_max = kv.get_double("train.lr_max", cfg.lr_max);
  cfg.beta1 = kv.get_double("train.beta1", cfg.beta1);
  cfg.beta2 = kv.get_double("train.beta2", cfg.beta2);
  cfg.adam_eps = kv.get_double("train.adam_eps", cfg.adam_eps);
  cfg.warmup_steps = kv.get_int("train.warmup_steps", cfg.warmup_steps);
  cfg.label_smoothing = kv.get_double("train.label_smoothing", cfg.label_smoothing);
  cfg.dropout = kv.get_double("train.dropout", cfg.dropout);
  cfg.batch_tokens = kv.get_long("train.batch_tokens", cfg.batch_tokens);
  cfg.max_steps = kv.get_long("train.max_steps", cfg.max_steps);
  cfg.seed = static_cast<std::uint64_t>(kv.get_long("train.seed", 1));
  cfg.log_every = kv.get_long("train.log_every", cfg.log_every);
  return cfg;
}

DecodeConfig decode_config_from(const KVConfig& kv) {
  DecodeConfig cfg;
  cfg.beam_size = kv.get_int("decode.beam_size", cfg.beam_size);
  cfg.alpha = kv.get_double("decode.alpha", cfg.alpha);
  cfg.max_out_len = kv.get_int("decode.max_out_len", cfg.max_out_len);
  return cfg;
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

KVConfig to_kv(const TransformerConfig& cfg) {
  KVConfig kv;
  kv.set("model.layers_enc", std::to_string(cfg.layers_enc));
  kv.set("model.layers_dec", std::to_string(cfg.layers_dec));
  kv.set("model.d_model", std::to_string(cfg.d_model));
  kv.set("model.d_ff", std::to_string(cfg.d_ff));
  kv.set("model.src_vocab", std::to_string(cfg.src_vocab));
  kv.set("model.tgt_vocab", std::to_string(cfg.tgt_vocab));
  kv.set("model.n_labels", std::to_string(cfg.n_labels));
  kv.set("model.max_len", std::to_string(cfg.max_len));
  kv.set("model.syntax_mode", to_string(cfg.syntax_mode));
  kv.set("model.sh_label_dim", std::to_string(cfg.sh_label_dim));
  kv.set("model.lisa_lambda", fmt(cfg.lisa_lambda));
  kv.set("model.tie_embeddings", cfg.tie_embeddings ? "true" : "false");
  kv.set("attention.heads", std::to_string(cfg.attention.heads));
  kv.set("attention.n_pascal", std::to_string(cfg.attention.n_pascal));
  kv.set("attention.pascal_layer", std::to_string(cfg.attention.pascal_layer));
  kv.set("attention.sigma2", fmt(cfg.attention.sigma2));
  kv.set("attention.parent_ignore_q", fmt(cfg.attention.parent_ignore_q));
  kv.set("attention.combine_mode",
         cfg.attention.combine_mode == CombineMode::kMultiply ? "multiply" : "add");
  kv.set("attention.parent_mode",
         cfg.attention.parent_mode == ParentMode::kGaussian ? "gaussian" : "parent_only");
  return kv;
}

void merge_train_config(KVConfig& kv, const TrainConfig& cfg) {
  kv.set("train.lr_max", fmt(cfg.lr_max));
  kv.set("train.beta1", fmt(cfg.beta1));
  kv.set("train.beta2", fmt(cfg.beta2));
  kv.set("train.adam_eps", fmt(cfg.adam_eps));
  kv.set("train.warmup_steps", std::to_string(cfg.warmup_steps));
  kv.set("train.label_smoothing", fmt(cfg.label_smoothing));
  kv.set("train.dropout", fmt(cfg.dropout));
  kv.set("train.batch_tokens", std::to_string(cfg.batch_tokens));
  kv.set("train.max_steps", std::to_string(cfg.max_steps));
  kv.set("train.seed", std::to_string(cfg.seed));
  kv.set("train.log_every", std::to_string(cfg.log_every));
}

void merge_decode_config(KVConfig& kv, const DecodeConfig& cfg) {
  kv.set("decode.beam_size", std::to_string(cfg.beam_size));
  kv.set("decode.alpha", fmt(cfg.alpha));
  kv.set("decode.max_out_len", std::to_string(cfg.max_out_len));
}

}  // namespace synmt
