#pragma once

// Held-out evaluation: geofence mIOU and percentage error over a uniform
// motion-in-depth sweep, continuous motion-in-depth error, flow endpoint
// error, and per-operation timing. Also the latency benchmark.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ttc/classifier.hpp"
#include "ttc/dataset.hpp"
#include "ttc/pipeline.hpp"

namespace ttc::eval {

struct MaskCounts {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
  std::size_t wrong = 0;
  std::size_t valid = 0;

  void add(const MaskCounts& o);
  // Positive-class IOU; 1 when both masks are empty.
  double iou() const;
  // 100 * wrong / valid; throws DomainError when nothing is valid.
  double pct_error() const;
};

// Throws ShapeError on mismatched extents.
MaskCounts mask_counts(const Mask& pred, const Mask& gt, const Mask& valid);
double miou(const Mask& pred, const Mask& gt, const Mask& valid);
double pct_error(const Mask& pred, const Mask& gt, const Mask& valid);

// Mean Euclidean endpoint error over the mask.
double endpoint_error(const ImageBuffer& u, const ImageBuffer& v, const ImageBuffer& u_gt,
                      const ImageBuffer& v_gt, const Mask& valid);

// Reads an externally produced eta or flow map.
ImageBuffer ingest_pfm(const std::filesystem::path& path, int channels = 1);

struct EvalConfig {
  std::vector<double> binary_etas;  // geofence thresholds, eta domain
  ScaleSweep continuous;            // uniform
  ShiftSweep flow;                  // same grid for u and v
  bool with_flow = true;
  int parallelism = 1;

  // 8 thresholds over [0.55, 1.25]; 24 scales over [0.5, 1.3]; 16 shifts
  // over [-24, 24].
  static EvalConfig standard(double interval);
};

struct AlphaMetrics {
  double eta = 0.0;
  double tau = 0.0;  // seconds; infinite for eta = 1
  MaskCounts counts;         // summed over pairs
  double miou = 0.0;         // mean of the per-pair IOU
  double pooled_iou = 0.0;   // counts.iou()
  double pct_error = 0.0;    // pooled over pairs
};

struct TimingStat {
  std::string name;
  std::size_t samples = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

TimingStat timing_stat(std::string name, std::vector<double> seconds);

struct EvalReport {
  std::string model;
  std::string dataset;
  std::size_t pairs = 0;
  double interval = 0.1;
  std::vector<AlphaMetrics> per_alpha;
  double miou = 0.0;       // mean over per_alpha
  double pooled_miou = 0.0;
  double pct_error = 0.0;  // mean over per_alpha
  double mid = 0.0;        // continuous estimate, pooled over valid pixels
  double quantized_mid = 0.0;  // bin-centre estimate from the same sweep
  std::size_t mid_pixels = 0;
  double monotonicity_violation_rate = 0.0;  // adjacent sweep maps with B_{i+1} > B_i
  double negative_bin_rate = 0.0;
  bool has_flow = false;
  double epe = 0.0;
  double flow_step = 0.0;
  std::size_t epe_pixels = 0;
  std::vector<TimingStat> timings;

  std::string to_text() const;
  std::string to_csv() const;
};

using PredictorFactory = std::function<std::unique_ptr<PairPredictor>(const sim::Sample&)>;

PredictorFactory net_predictors(const nn::CompactNet& net);
PredictorFactory oracle_predictors(double softness);

// Throws ConfigError listing missing ground-truth channels.
EvalReport evaluate(const PredictorFactory& factory, const sim::Dataset& data, const EvalConfig& config,
                    std::string model = "", std::string dataset = "");

// Motion-in-depth from a quantized map: bin centres, sentinel bins half a
// step beyond the outer edges.
ImageBuffer quantized_eta(const QuantizedTtcMap& q);

struct BenchRow {
  int sweep_size = 0;
  int parallelism = 0;
  int repeats = 0;
  double median_ms = 0.0;   // feature extraction plus sweep
  double p95_ms = 0.0;
  double sweep_median_ms = 0.0;
  double feature_calls_per_pair = 0.0;
};

struct BenchConfig {
  std::vector<int> sweep_sizes{1, 8, 24};
  std::vector<int> parallelism{1, 2, 4};
  int repeats = 5;
  int warmup = 1;
};

std::vector<BenchRow> bench(const nn::CompactNet& net, const ImageBuffer& i0, const ImageBuffer& i1,
                            const BenchConfig& config);
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace ttc::eval
