#pragma once

#include <filesystem>
#include <string>

#include "aacher/networks.hpp"
#include "aacher/normalizer.hpp"

namespace aacher {

// Everything needed to run or resume a trained policy: ensemble shape, all
// main and target parameters in row-major order, and normalizer statistics.
struct Checkpoint {
  std::string env_name;
  Ensemble ensemble;
  ObsNormalizer normalizer;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned binary container with explicit shapes. Save/load round-trips all
// parameters bit-exactly. Version mismatch, truncation and shape disagreement
// are reported as distinct CheckpointError kinds.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aacher
