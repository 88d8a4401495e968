#pragma once

// Randomized scene generation and the on-disk dataset format: one manifest
// line per pair,
//   pair_id i0_path i1_path eta_path ttc_path flow_u_path flow_v_path valid_path
// with paths relative to the manifest directory. Images are P6 PPM, float
// maps little-endian PFM, the validity mask a P5 PGM. A companion
// dataset_info.txt records the frame interval and generator settings.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ttc/scene_sim.hpp"

namespace ttc::sim {

struct GeneratorConfig {
  int width = 128;
  int height = 64;
  double focal = 100.0;
  double interval = 0.1;
  int min_objects = 1;
  int max_objects = 3;
  double depth_min = 4.0;
  double depth_max = 12.0;
  double eta_min = 0.5;
  double eta_max = 1.3;
  double lateral_speed_max = 5.0;   // |Vx|, m/s
  double vertical_speed_max = 2.0;  // |Vy|, m/s
  double half_extent_min = 0.5;
  double half_extent_max = 1.5;
  double background_depth = 40.0;
  double background_velocity = 0.0;

  // Throws ConfigError when the ranges cannot produce valid scenes.
  void validate() const;
};

// Scene `index` of a dataset seeded with `seed`; independent of any other
// index, so generation order and parallelism never change the result.
SceneSpec generate_scene(const GeneratorConfig& config, std::uint64_t seed, std::uint64_t index);

struct Sample {
  std::string id;
  ImageBuffer i0;
  ImageBuffer i1;
  GroundTruth gt;  // depth maps and object ids are empty when loaded from disk
};

struct Dataset {
  double interval = 0.1;
  std::vector<Sample> samples;
};

struct DatasetSummary {
  std::size_t pairs = 0;
  std::size_t objects = 0;
  std::vector<std::size_t> eta_histogram;  // 8 bins over [0.5, 1.3]
  double eta_min = 0.0;
  double eta_max = 0.0;
  std::size_t valid_pixels = 0;
};

// Generates and writes n pairs into `dir` (created if needed).
DatasetSummary make_dataset(const std::filesystem::path& dir, std::size_t n,
                            const GeneratorConfig& config, std::uint64_t seed);

// Generates in memory without touching the filesystem.
Dataset generate_dataset(std::size_t n, const GeneratorConfig& config, std::uint64_t seed);

void write_sample(const std::filesystem::path& dir, const Sample& sample, std::ostream& manifest);
Dataset load_dataset(const std::filesystem::path& dir);

// Scans every GT eta value at valid pixels; throws ConfigError if any lies
// outside [lo, hi].
DatasetSummary audit_dataset(const Dataset& dataset, double lo = kSweepEtaMin, double hi = kSweepEtaMax);

}  // namespace ttc::sim
