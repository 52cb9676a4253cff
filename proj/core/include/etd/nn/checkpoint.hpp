#pragma once

#include <functional>
#include <string>

#include "etd/nn/params.hpp"

namespace etd::nn {

/// Checkpoint header. The fingerprints bind a parameter file to the encoder
/// configuration and vocabulary it was trained against; loading refuses a
/// mismatch unless forced. `provenance` names the training data ("gold",
/// "gold+denoised", ...), which gates uses that require a gold-only model.
struct CheckpointHeader {
  int format_version = 1;
  std::string config_fingerprint;
  std::string vocab_fingerprint;
  std::string provenance;
};

/// Binary layout: magic "ETDCKPT1", u32 header-JSON length, header JSON, then
/// per tensor: u32 name length, name, u32 rank, u64 dims, row-major
/// little-endian float32 data. `keep` (when given) selects the tensor subset
/// to write — used to emit per-head checkpoints from a jointly trained model.
void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ParameterSet& params,
                     const std::function<bool(const std::string&)>& keep = nullptr);

/// Reads values into an already-shaped ParameterSet; the tensor name set and
/// shapes must match exactly.
CheckpointHeader load_checkpoint(const std::string& path, ParameterSet& params,
                                 const std::string& expected_config_fingerprint,
                                 const std::string& expected_vocab_fingerprint,
                                 bool force = false);

/// Header only (used for provenance checks before committing to a full load).
CheckpointHeader peek_checkpoint(const std::string& path);

}  // namespace etd::nn
