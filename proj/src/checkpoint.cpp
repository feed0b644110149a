// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace synmt {

namespace {

constexpr char kMagic[8] = {'S', 'Y', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kDtypeF64 = 0;

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(T));
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t bits = 0;
  for (size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("checkpoint: truncated string");
  return s;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint8_t>(out, kDtypeF64);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(out, m(i, j));
}

Matrix get_matrix(std::istream& in) {
  if (get<std::uint8_t>(in) != kDtypeF64) throw std::runtime_error("checkpoint: unknown dtype");
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>(in);
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const std::string& config_text,
                     long step, const AdamOptimizer* opt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put_string(out, config_text);
  put<std::int64_t>(out, step);
  put<std::uint64_t>(out, model.params.size());
  for (const auto& [name, t] : model.params) {
    put_string(out, name);
    put_matrix(out, t.value());
  }
  const bool with_opt = opt != nullptr && !opt->moment1().empty();
  put<std::uint8_t>(out, with_opt ? 1 : 0);
  if (with_opt) {
    put<std::int64_t>(out, opt->steps_taken());
    put<std::uint64_t>(out, opt->moment1().size());
    for (const auto& m : opt->moment1()) put_matrix(out, m);
    for (const auto& v : opt->moment2()) put_matrix(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::string read_checkpoint_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  return get_string(in);
}

LoadedCheckpoint load_checkpoint(const std::string& path, const TransformerConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("checkpoint: unsupported version");

  LoadedCheckpoint ck;
  ck.config_text = get_string(in);
  ck.step = static_cast<long>(get<std::int64_t>(in));
  ck.model = build_model(cfg, /*seed=*/0);
  const auto count = get<std::uint64_t>(in);
  if (count != ck.model.params.size())
    throw std::runtime_error("checkpoint: parameter count mismatch (config/data incompatible)");
  for (auto& [name, t] : ck.model.params) {
    const std::string saved = get_string(in);
    if (saved != name)
      throw std::runtime_error("checkpoint: parameter '" + saved + "' where '" + name +
                               "' was expected");
    Matrix m = get_matrix(in);
    if (m.rows() != t.rows() || m.cols() != t.cols())
      throw std::runtime_error("checkpoint: shape mismatch for '" + name + "'");
    t.value() = std::move(m);
  }
  if (get<std::uint8_t>(in) == 1) {
    ck.has_optimizer = true;
    ck.opt_steps = static_cast<long>(get<std::int64_t>(in));
    const auto n = get<std::uint64_t>(in);
    ck.opt_m.reserve(n);
    ck.opt_v.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) ck.opt_m.push_back(get_matrix(in));
    for (std::uint64_t i = 0; i < n; ++i) ck.opt_v.push_back(get_matrix(in));
  }
  return ck;
}

}  // namespace synmt
