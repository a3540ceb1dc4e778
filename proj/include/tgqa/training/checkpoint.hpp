#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgqa/model/parameters.hpp"
#include "tgqa/text/vocabulary.hpp"
#include "tgqa/training/trainer.hpp"

namespace tgqa::training {

inline constexpr uint32_t kCheckpointVersion = 1;

/// Everything needed to rebuild a predictor: parameters (with their model
/// config), the vocabulary and the training config that produced them.
struct Checkpoint {
  model::ModelParameters<float> params;
  text::Vocabulary vocab;
  TrainConfig train;
};

/// Layout: "TGQA", u32 version, u32 header length, JSON header (configs,
/// vocabulary, tensor manifest), little-endian f32 payloads in manifest
/// order, trailing u32 CRC32 of every preceding byte.
std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, version mismatch, truncation, checksum
/// failure or a manifest that does not match the configured layout.
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tgqa::training
