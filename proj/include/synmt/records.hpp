// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_RECORDS_HPP
#define SYNMT_RECORDS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace synmt {

/// One preprocessed sentence pair, ready for any syntax mode. The parent
/// vectors cover the full source token sequence including BOS/EOS.
struct Record {
  std::vector<std::int32_t> src_ids;
  std::vector<std::int32_t> tgt_ids;
  std::vector<double> parent_middle;       // PASCAL: fractional positions
  std::vector<std::int32_t> parent_first;  // LISA: first-subword indices
  std::vector<std::int32_t> label_ids;     // S&H: per-token dependency labels
};

/// Length-prefixed little-endian stream with a versioned header.
void write_records(std::ostream& out, const std::vector<Record>& records);
std::vector<Record> read_records(std::istream& in);

void write_records_file(const std::string& path, const std::vector<Record>& records);
std::vector<Record> read_records_file(const std::string& path);

/// Human-readable dump: one JSON object per line.
std::string records_to_jsonl(const std::vector<Record>& records);

}  // namespace synmt

#endif  // SYNMT_RECORDS_HPP
