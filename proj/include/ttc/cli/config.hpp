#pragma once

// Plain-text configuration: one `key = value` per line, `#` starts a
// comment. Every key has a default; unknown keys are rejected and values are
// validated when loaded.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ttc/dataset.hpp"
#include "ttc/eval.hpp"
#include "ttc/nn/trainer.hpp"

namespace ttc::cli {

struct Config {
  sim::GeneratorConfig generator;
  std::uint64_t dataset_seed = 1;
  std::size_t dataset_size = 500;

  std::uint64_t init_seed = 1;
  nn::TrainConfig train;

  int eval_thresholds = 8;
  double eval_eta_min = 0.55;
  double eval_eta_max = 1.25;
  int sweep_scales = 24;
  double sweep_alpha_min = 0.5;
  double sweep_alpha_max = 1.3;
  int flow_shifts = 16;
  double flow_shift_max = 24.0;
  double oracle_softness = 0.0;

  int parallelism = 1;

  std::string train_dir = "data/train";
  std::string test_dir = "data/test";
  std::string checkpoint = "model.ckpt";
  std::string output_dir = "out";

  // Throws ConfigError for unknown keys and malformed values.
  void set(const std::string& key, const std::string& value);
  // Parses `key=value` lines; throws ConfigError naming the line.
  void apply(const std::string& text, const std::string& origin = "config");
  void load(const std::filesystem::path& path);
  void validate() const;

  eval::EvalConfig eval_config(double interval) const;
  ScaleSweep continuous_sweep(double interval) const;
  ShiftSweep flow_sweep() const;
};

struct KeyDoc {
  std::string key;
  std::string default_value;
  std::string description;
};

std::vector<KeyDoc> documented_keys();
std::string key_documentation();

}  // namespace ttc::cli
