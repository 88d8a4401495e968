#include "ttc/classifier.hpp"

#include <cmath>

#include "ttc/nn/ops.hpp"

namespace ttc {

namespace {

const ImageBuffer& task_quantity(const sim::GroundTruth& gt, Task task) {
  switch (task) {
    case Task::ttc:
      return gt.eta;
    case Task::flow_u:
      return gt.flow_u;
    case Task::flow_v:
      return gt.flow_v;
  }
  return gt.eta;
}

class OraclePredictor final : public PairPredictor {
 public:
  OraclePredictor(std::shared_ptr<const sim::GroundTruth> gt, double softness)
      : gt_(std::move(gt)), softness_(softness) {}

  ProbabilityMap predict(const WarpParam& param) const override {
    return oracle_predict(*gt_, task_for(param.kind), param, softness_);
  }
  int height() const override { return gt_->height(); }
  int width() const override { return gt_->width(); }

 private:
  std::shared_ptr<const sim::GroundTruth> gt_;
  double softness_;
};

constexpr const char* kUntrainedWarning = "network is untrained; probabilities are not meaningful";

class NetPredictor final : public PairPredictor {
 public:
  NetPredictor(const nn::CompactNet& net, const ImageBuffer& i0, const ImageBuffer& i1)
      : net_(net), height_(i0.height()), width_(i0.width()) {
    f0_ = net.extract(i0).features;
    f1_ = net.extract(i1).features;
  }

  ProbabilityMap predict(const WarpParam& param) const override {
    ProbabilityMap out;
    out.prob = nn::sigmoid(net_.trunk_forward(f0_, f1_, param, height_, width_));
    out.orientation = task_for(param.kind);
    out.param = param;
    if (!net_.trained()) out.warning = kUntrainedWarning;
    return out;
  }
  int height() const override { return height_; }
  int width() const override { return width_; }

 private:
  const nn::CompactNet& net_;
  int height_;
  int width_;
  ImageBuffer f0_;
  ImageBuffer f1_;
};

}  // namespace

ProbabilityMap oracle_predict(const sim::GroundTruth& gt, Task task, const WarpParam& param, double softness) {
  param.validate();
  if (task_for(param.kind) != task) {
    throw ConfigError("oracle: warp kind " + to_string(param.kind) + " does not drive task " + to_string(task));
  }
  if (!(softness >= 0.0)) throw ConfigError("oracle: softness must be >= 0");
  const ImageBuffer& q = task_quantity(gt, task);
  ProbabilityMap out;
  out.prob = ImageBuffer(q.height(), q.width());
  out.orientation = task;
  out.param = param;
  const auto src = q.values();
  auto dst = out.prob.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = softness == 0.0 ? (src[i] > param.value ? 1.0 : 0.0)
                             : nn::sigmoid((src[i] - param.value) / softness);
  }
  return out;
}

OracleClassifier::OracleClassifier(std::shared_ptr<const sim::GroundTruth> gt, double softness)
    : gt_(std::move(gt)), softness_(softness) {
  if (!gt_) throw ConfigError("oracle classifier needs ground truth");
  if (!(softness >= 0.0)) throw ConfigError("oracle: softness must be >= 0");
}

std::unique_ptr<PairPredictor> OracleClassifier::prepare(const ImageBuffer& i0, const ImageBuffer& i1) const {
  if (!i0.empty()) require_same_extent(i0, gt_->eta, "oracle classifier");
  if (!i1.empty()) require_same_extent(i1, gt_->eta, "oracle classifier");
  return std::make_unique<OraclePredictor>(gt_, softness_);
}

std::unique_ptr<PairPredictor> NetClassifier::prepare(const ImageBuffer& i0, const ImageBuffer& i1) const {
  if (!i0.same_shape(i1)) throw ShapeError("classifier inputs differ in shape");
  return std::make_unique<NetPredictor>(net_, i0, i1);
}

ProbabilityMap forward(const nn::CompactNet& net, const ImageBuffer& i0, const ImageBuffer& i1,
                       const WarpParam& param) {
  return NetClassifier(net).prepare(i0, i1)->predict(param);
}

}  // namespace ttc
