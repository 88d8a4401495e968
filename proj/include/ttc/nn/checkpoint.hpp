#pragma once

// Versioned binary checkpoint: magic, version, network configuration, a
// layer manifest with shapes, the training state, then little-endian
// float64 parameters (and optimizer velocity when present).

#include <cstdint>
#include <filesystem>
#include <string>

#include "ttc/nn/compact_net.hpp"

namespace ttc::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainState {
  std::string stage = "init";  // init | binary | continuous
  int epoch = 0;               // completed epochs of `stage`
  std::uint64_t step = 0;
  std::uint64_t stage_steps = 0;  // optimizer updates within `stage`
  double learning_rate = 0.0;
  double best_loss = 0.0;
  int plateau = 0;
  bool has_velocity = false;
  Gradients velocity;      // SGD velocity or Adam first moment
  Gradients second_moment;  // Adam only; empty for SGD
};

struct Checkpoint {
  CompactNet net;
  TrainState state;
};

void save_checkpoint(const std::filesystem::path& path, const CompactNet& net, const TrainState& state);
// Throws FormatError on bad magic, unsupported version, manifest mismatch or
// truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ttc::nn
