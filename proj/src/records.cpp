// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#include "synmt/records.hpp"

#include <nlohmann/json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace synmt {

namespace {

constexpr char kMagic[8] = {'S', 'Y', 'N', 'R', 'E', 'C', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  // Little-endian regardless of host order.
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
  if (!in) throw std::runtime_error("record stream: truncated input");
  std::uint64_t bits = 0;
  for (size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  T v;
  std::memcpy(&v, &bits, sizeof(T));
  return v;
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (const T& x : v) put<T>(out, x);
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::vector<T> v(n);
  for (auto& x : v) x = get<T>(in);
  return v;
}

}  // namespace

void write_records(std::ostream& out, const std::vector<Record>& records) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, records.size());
  for (const auto& r : records) {
    std::ostringstream payload;
    put_vec(payload, r.src_ids);
    put_vec(payload, r.tgt_ids);
    put_vec(payload, r.parent_middle);
    put_vec(payload, r.parent_first);
    put_vec(payload, r.label_ids);
    const std::string s = payload.str();
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
}

std::vector<Record> read_records(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("record stream: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("record stream: unsupported version " + std::to_string(version));
  const auto count = get<std::uint64_t>(in);
  std::vector<Record> records(count);
  for (auto& r : records) {
    const auto len = get<std::uint64_t>(in);
    std::string payload(len, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(len));
    if (!in) throw std::runtime_error("record stream: truncated record");
    std::istringstream p(payload);
    r.src_ids = get_vec<std::int32_t>(p);
    r.tgt_ids = get_vec<std::int32_t>(p);
    r.parent_middle = get_vec<double>(p);
    r.parent_first = get_vec<std::int32_t>(p);
    r.label_ids = get_vec<std::int32_t>(p);
  }
  return records;
}

void write_records_file(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_records(out, records);
}

std::vector<Record> read_records_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_records(in);
}

std::string records_to_jsonl(const std::vector<Record>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["src_ids"] = r.src_ids;
    j["tgt_ids"] = r.tgt_ids;
    j["parent_middle"] = r.parent_middle;
    j["parent_first"] = r.parent_first;
    j["label_ids"] = r.label_ids;
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace synmt
