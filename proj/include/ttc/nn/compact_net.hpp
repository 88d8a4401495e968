#pragma once

// Compact binary classifier: a three-layer feature extractor applied once
// per frame, and an encoder-decoder trunk with skip connections that
// compares reference features with warped second-frame features. Three
// single-channel heads (TTC, horizontal flow, vertical flow) produce logits;
// the logistic of a head is the per-pixel probability that the quantity
// exceeds the warp parameter.

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "ttc/image.hpp"
#include "ttc/kernels.hpp"
#include "ttc/task.hpp"
#include "ttc/warp.hpp"

namespace ttc::nn {

struct NetConfig {
  std::array<int, 3> feature_channels{8, 16, 16};
  std::array<int, 2> encoder_channels{32, 64};
  int decoder_channels = 16;

  static NetConfig desk() { return {}; }
  static NetConfig toy() { return {{2, 3, 3}, {4, 5}, 3}; }
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

struct ConvLayer {
  std::string name;
  kernels::ConvShape shape;
  std::vector<double> weight;
  std::vector<double> bias;
};

// Gradient buffers mirroring the layer list.
struct Gradients {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  void zero();
  void add(const Gradients& other);
  void scale(double factor);
};

// Layer indices in the fixed parameter order.
enum Layer : int { kFe1, kFe2, kFe3, kEnc1, kEnc1b, kEnc2, kDec1, kDec2, kHead, kLayerCount };

// Feature maps are at half the input resolution, so shifts are halved.
inline constexpr double kFeatureStride = 2.0;

class CompactNet {
 public:
  explicit CompactNet(NetConfig config = NetConfig::desk());
  CompactNet(const CompactNet& other);
  CompactNet& operator=(const CompactNet& other);

  // Fan-in scaled uniform weights, zero biases, zero head (cold-start output
  // is exactly 0.5 everywhere).
  void initialize(std::uint64_t seed);

  const NetConfig& config() const { return config_; }
  std::vector<ConvLayer>& layers() { return layers_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;
  Gradients make_gradients() const;

  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }

  struct FeatureCache {
    ImageBuffer input;  // normalized image
    ImageBuffer z1, z2;
    ImageBuffer a1, a2;
    ImageBuffer features;
  };

  // Counts every call (see feature_extractions()).
  FeatureCache extract(const ImageBuffer& rgb) const;
  void extract_backward(const FeatureCache& cache, const ImageBuffer& dfeatures, Gradients& grads) const;

  struct TrunkCache {
    WarpParam feature_param;
    Task task = Task::ttc;
    PadRecord pad;
    int feature_height = 0, feature_width = 0;
    ImageBuffer x;  // concat(pad(f0), pad(warp(f1)))
    ImageBuffer z_enc1, a_enc1, z_enc1b, a_enc1b, z_enc2, a_enc2;
    ImageBuffer cat1, z_dec1, a_dec1;
    ImageBuffer cat2, z_dec2, a_dec2;
  };

  // Per-pixel logits at out_height x out_width for the head matching
  // `task_param.kind`. `task_param` is expressed at input resolution.
  ImageBuffer trunk_forward(const ImageBuffer& f0, const ImageBuffer& f1, const WarpParam& task_param,
                            int out_height, int out_width, TrunkCache* cache = nullptr) const;
  // Back-propagates logit gradients; accumulates parameter gradients and
  // adds into df0 / df1 (feature-shaped, allocated by the caller).
  void trunk_backward(const TrunkCache& cache, const ImageBuffer& dlogits, Gradients& grads,
                      ImageBuffer& df0, ImageBuffer& df1) const;

  // Warp applied to second-frame features for a task parameter at input
  // resolution: scales pass through, shifts are negated (aligning content
  // displaced by +u) and divided by the feature stride.
  static WarpParam feature_warp(const WarpParam& task_param);

  std::uint64_t feature_extractions() const { return feature_calls_.load(); }
  void reset_feature_extractions() { feature_calls_ = 0; }

 private:
  ImageBuffer conv(int layer, const ImageBuffer& in) const;
  ImageBuffer conv_backward(int layer, const ImageBuffer& in, const ImageBuffer& dout, Gradients& g,
                            bool need_input_grad = true) const;

  NetConfig config_;
  std::vector<ConvLayer> layers_;
  bool trained_ = false;
  mutable std::atomic<std::uint64_t> feature_calls_{0};
};

}  // namespace ttc::nn
