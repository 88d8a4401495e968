#pragma once

// Binary classifiers behind one interface. A classifier is prepared once per
// image pair (feature extraction happens here) and then answers any number
// of independent threshold queries; predict() is const and safe to call
// concurrently.

#include <memory>
#include <string>

#include "ttc/image.hpp"
#include "ttc/nn/compact_net.hpp"
#include "ttc/scene_sim.hpp"
#include "ttc/task.hpp"
#include "ttc/warp.hpp"

namespace ttc {

// Per-pixel probability that the task quantity exceeds the warp parameter:
// p(eta > alpha) for scales, p(u > u_i) / p(v > v_i) for shifts.
struct ProbabilityMap {
  ImageBuffer prob;
  Task orientation = Task::ttc;
  WarpParam param;
  std::string warning;  // non-empty when produced by an untrained network
};

class PairPredictor {
 public:
  virtual ~PairPredictor() = default;
  virtual ProbabilityMap predict(const WarpParam& param) const = 0;
  virtual int height() const = 0;
  virtual int width() const = 0;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::unique_ptr<PairPredictor> prepare(const ImageBuffer& i0, const ImageBuffer& i1) const = 0;
};

// Idealized classifier reading the ground truth: hard indicator when
// softness is 0, logistic((q - threshold) / softness) otherwise. Throws
// ConfigError when `task` does not match `param.kind`.
ProbabilityMap oracle_predict(const sim::GroundTruth& gt, Task task, const WarpParam& param, double softness);

class OracleClassifier final : public Classifier {
 public:
  OracleClassifier(std::shared_ptr<const sim::GroundTruth> gt, double softness);
  std::unique_ptr<PairPredictor> prepare(const ImageBuffer& i0, const ImageBuffer& i1) const override;

 private:
  std::shared_ptr<const sim::GroundTruth> gt_;
  double softness_;
};

class NetClassifier final : public Classifier {
 public:
  explicit NetClassifier(const nn::CompactNet& net) : net_(net) {}
  std::unique_ptr<PairPredictor> prepare(const ImageBuffer& i0, const ImageBuffer& i1) const override;

 private:
  const nn::CompactNet& net_;
};

// One-shot prediction: extracts features of both frames, warps, runs the
// trunk and applies the logistic.
ProbabilityMap forward(const nn::CompactNet& net, const ImageBuffer& i0, const ImageBuffer& i1,
                       const WarpParam& param);

}  // namespace ttc
