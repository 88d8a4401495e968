#pragma once

// Composes independent binary classifications into binary geofences,
// quantized TTC and continuous motion-in-depth / TTC / flow maps. The sweep
// of thresholds is evaluated in the motion-in-depth domain, where the scale
// factor for a TTC threshold tau_i is alpha_i = eta_i = 1 - T / tau_i.

#include <span>
#include <vector>

#include "ttc/classifier.hpp"
#include "ttc/maps.hpp"
#include "ttc/ttc_math.hpp"

namespace ttc {

// Scale range the classifier is trained on.
inline constexpr double kTrainedAlphaMin = 0.5;
inline constexpr double kTrainedAlphaMax = 1.3;

struct ScaleSweep {
  std::vector<double> alphas;  // strictly increasing
  double interval = 0.1;       // T, seconds

  // `count` values from `first` to `last` inclusive.
  static ScaleSweep uniform(double first, double last, int count, double interval);
  // Throws ConfigError unless strictly increasing and positive.
  void validate() const;
  // Spacing of a uniform sweep; throws ConfigError when non-uniform.
  double uniform_step() const;
  std::size_t size() const { return alphas.size(); }
};

struct ShiftSweep {
  std::vector<double> shifts;  // strictly increasing, uniform
  static ShiftSweep uniform(double first, double step, int count);
  double uniform_step() const;
};

struct SweepResult {
  std::vector<ProbabilityMap> maps;  // in job order
  double seconds = 0.0;              // wall clock
};

// Runs one prediction per job on `parallelism` workers. Every job is
// independent and deterministic, so the maps are bit-identical for any
// parallelism.
SweepResult sweep_executor(const PairPredictor& predictor, std::span<const WarpParam> jobs, int parallelism);

struct GeofenceMask {
  Mask inside;      // 0 < tau <= tau_i, i.e. eta <= eta_i
  double tau = 0.0;
  double eta = 0.0;
  ProbabilityMap prob;  // p(eta > eta_i)
};

inline constexpr double kBinarizeThreshold = 0.5;

// Throws DomainError for tau_i <= 0 and OutOfRangeError when eta_i leaves
// the trained range.
GeofenceMask binary_geofence(const PairPredictor& predictor, Ttc tau_i, FrameInterval interval);
GeofenceMask binary_geofence(const Classifier& classifier, const ImageBuffer& i0, const ImageBuffer& i1,
                             Ttc tau_i, FrameInterval interval);
GeofenceMask geofence_from_map(ProbabilityMap prob, double tau_i, double eta_i);

// Bin i in 1..N-1 holds (alpha_i, alpha_{i+1}] (1-based edges); bin 0 holds
// eta <= alpha_1 and bin N holds eta > alpha_N.
struct QuantizedTtcMap {
  int height = 0;
  int width = 0;
  std::vector<int> bins;
  std::vector<double> edges;       // eta domain, increasing
  std::size_t negative_count = 0;  // bin probabilities clamped from below 0
  std::size_t probability_count = 0;

  int bin_count() const { return static_cast<int>(edges.size()) + 1; }
  int at(int y, int x) const { return bins[static_cast<std::size_t>(y) * width + x]; }
  double negative_rate() const {
    return probability_count ? static_cast<double>(negative_count) / probability_count : 0.0;
  }
};

// Bin of a motion-in-depth value under the edge convention above.
int quantization_bin(double eta, std::span<const double> edges);

QuantizedTtcMap quantize_maps(std::span<const ProbabilityMap> maps, std::span<const double> edges);
QuantizedTtcMap quantized_ttc(const PairPredictor& predictor, const ScaleSweep& sweep, int parallelism = 1);

// eta_hat = alpha_1 + step * (sum_i B_i - 1/2), clamped to
// [alpha_1 - step / 2, alpha_N + step / 2].
ImageBuffer auc_estimate(std::span<const ImageBuffer> probs, double first, double step);
ImageBuffer auc_estimate(std::span<const ProbabilityMap> maps, double first, double step);

struct ContinuousEta {
  ImageBuffer eta;
  TtcMap ttc;
};

ContinuousEta continuous_eta(const PairPredictor& predictor, const ScaleSweep& sweep, int parallelism = 1);

struct FlowEstimate {
  ImageBuffer u;
  ImageBuffer v;
};

FlowEstimate continuous_flow(const PairPredictor& predictor, const ShiftSweep& u_sweep,
                             const ShiftSweep& v_sweep, int parallelism = 1);

}  // namespace ttc
