// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_CONFIG_HPP
#define SYNMT_CONFIG_HPP

#include "synmt/beam.hpp"
#include "synmt/model.hpp"
#include "synmt/train.hpp"

#include <map>
#include <string>

namespace synmt {

/// Flat-sectioned key=value configuration. "[section]" headers turn keys
/// into "section.key"; '#' starts a comment. No implicit type coercion:
/// every getter parses strictly and names the key on failure.
class KVConfig {
 public:
  KVConfig() = default;
  static KVConfig parse(const std::string& text);
  static KVConfig load_file(const std::string& path);

  /// "key=value" with a dotted key; applied after file values.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Canonical text form: sections sorted, keys sorted within a section.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

TransformerConfig transformer_config_from(const KVConfig& kv);
TrainConfig train_config_from(const KVConfig& kv);
DecodeConfig decode_config_from(const KVConfig& kv);

/// Inverse of the *_config_from readers; used for config echoes and the
/// checkpoint snapshot.
KVConfig to_kv(const TransformerConfig& cfg);
void merge_train_config(KVConfig& kv, const TrainConfig& cfg);
void merge_decode_config(KVConfig& kv, const DecodeConfig& cfg);

}  // namespace synmt

#endif  // SYNMT_CONFIG_HPP
