#pragma once

#include <string>

#include <json.hpp>

#include "robocooklab/nn/layers.hpp"

namespace rcl::nn {

constexpr int kCheckpointFormatVersion = 1;

/// Checkpoint file = one JSON header line + '\n' + raw little-endian f32
/// blob in parameter-store order.
struct CheckpointHeader {
  std::string arch;
  nlohmann::json config;  // architecture/config payload, arch-specific
  std::string config_hash;
  int format_version = kCheckpointFormatVersion;
};

void save_checkpoint(const std::string& path, const CheckpointHeader& header,
                     const ParamStore& params);

/// Loads the header and copies the blob into an existing store whose layout
/// must match the blob length exactly.
CheckpointHeader load_checkpoint(const std::string& path, ParamStore& params);

/// Header-only peek (to pick the right architecture before building it).
CheckpointHeader read_checkpoint_header(const std::string& path);

}  // namespace rcl::nn
