// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#ifndef SYNMT_CHECKPOINT_HPP
#define SYNMT_CHECKPOINT_HPP

#include "synmt/model.hpp"
#include "synmt/train.hpp"

#include <string>

namespace synmt {

/// Binary checkpoint: magic, format version, config snapshot as canonical
/// text, named weight tensors (little-endian 64-bit floats, row-major),
/// optional optimizer state, step counter. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Model& model, const std::string& config_text,
                     long step, const AdamOptimizer* opt = nullptr);

struct LoadedCheckpoint {
  Model model;
  std::string config_text;
  long step = 0;
  bool has_optimizer = false;
  std::vector<Matrix> opt_m, opt_v;
  long opt_steps = 0;
};

/// `cfg` must describe the same architecture the checkpoint was saved from;
/// tensor names and shapes are verified.
LoadedCheckpoint load_checkpoint(const std::string& path, const TransformerConfig& cfg);

/// Reads only the embedded config text (to rebuild the config first).
std::string read_checkpoint_config(const std::string& path);

}  // namespace synmt

#endif  // SYNMT_CHECKPOINT_HPP
