#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dshape/harness.hpp"
#include "dshape/learner.hpp"

namespace dshape {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  PolicyParams params;
  TrainConfig config;
  std::uint64_t seed = 0;
};

// Structured-text dump. Weights are stored as hex floats so a reload is
// bit-exact.
std::string dump_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dshape
