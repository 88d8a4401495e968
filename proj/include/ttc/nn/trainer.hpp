#pragma once

// Two training stages. The binary stage samples one scale factor and one
// shift pair per image pair and minimizes weighted BCE on the three heads;
// its first epochs train the flow heads only. The continuous stage sweeps
// every pair over a uniform scale and shift grid, applies the AUC estimator
// and adds a smooth-L1 term on the continuous output.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ttc/dataset.hpp"
#include "ttc/nn/checkpoint.hpp"
#include "ttc/nn/compact_net.hpp"

namespace ttc::nn {

enum class Optimizer { sgd, adam };

struct TrainConfig {
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // SGD momentum, Adam first-moment decay
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double lr_decay = 0.5;
  int plateau_patience = 2;
  int batch_size = 4;
  int epochs = 10;          // binary stage, including the flow-only epochs
  int pretrain_epochs = 1;  // flow-only epochs at the start of the binary stage
  double ttc_weight = 0.8;
  double flow_weight = 0.2;  // split evenly between the two flow heads
  double alpha_min = 0.5;
  double alpha_max = 1.3;
  double shift_max = 24.0;  // pixels; sampled shifts are even in [-max, max]
  // Fraction of draws centered on the ground-truth motion of a random moving
  // pixel (eta != 1 or flow != 0) instead of uniform over the ranges.
  double focus_fraction = 0.0;
  double focus_eta_jitter = 0.1;
  double focus_shift_jitter = 4.0;  // pixels

  int continuous_epochs = 1;
  int continuous_pairs = 50;  // pairs per continuous epoch, 0 = all
  double continuous_learning_rate = 1e-4;
  int continuous_scales = 24;
  int continuous_shifts = 16;
  double bce_weight = 0.1;
  double regression_weight = 0.9;

  std::uint64_t seed = 1;
  int parallelism = 1;  // workers over the examples of a batch

  // Throws ConfigError.
  void validate() const;
};

struct LossRecord {
  std::uint64_t step = 0;
  std::string task;  // ttc | flow_u | flow_v | total
  double loss = 0.0;
};

// Called after every completed epoch with the updated state; returning
// false stops training (the state is then resumable).
using EpochHook = std::function<bool(const CompactNet&, const TrainState&)>;

struct TrainResult {
  std::vector<LossRecord> losses;
  bool finished = false;
};

// Thrown when a loss becomes non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Continues from `state` (a fresh TrainState starts at epoch 0).
TrainResult train_binary(CompactNet& net, const sim::Dataset& data, const TrainConfig& config, TrainState& state,
                         const EpochHook& hook = {});
// Requires state.stage == "binary" (or an in-progress "continuous" state).
TrainResult train_continuous(CompactNet& net, const sim::Dataset& data, const TrainConfig& config,
                             TrainState& state, const EpochHook& hook = {});

// Mean weighted binary-stage loss of fixed draws over `data` (no update).
double binary_objective(const CompactNet& net, const sim::Dataset& data, const TrainConfig& config,
                        std::uint64_t draw_seed);

// Mean weighted loss over `data` under the exact order and task parameters
// the binary stage draws for `epoch` (no update).
double epoch_objective(const CompactNet& net, const sim::Dataset& data, const TrainConfig& config, int epoch);

// Weighted continuous-stage loss of one pair; accumulates its parameter
// gradient into `grads` when non-null.
double continuous_objective(const CompactNet& net, const sim::Sample& sample, const TrainConfig& config,
                            Gradients* grads = nullptr);

// The uniform sweeps used by the continuous stage and by evaluation.
std::vector<double> continuous_scale_grid(const TrainConfig& config);
std::vector<double> continuous_shift_grid(const TrainConfig& config);

}  // namespace ttc::nn
