#include "ttc/nn/compact_net.hpp"

#include <cmath>
#include <random>

#include "ttc/nn/ops.hpp"

namespace ttc::nn {

namespace {

ConvLayer make_layer(std::string name, int cin, int cout, int stride) {
  ConvLayer l;
  l.name = std::move(name);
  l.shape = {cin, cout, 3, stride, 1};
  l.weight.assign(static_cast<std::size_t>(l.shape.weight_count()), 0.0);
  l.bias.assign(static_cast<std::size_t>(cout), 0.0);
  return l;
}

std::span<const double> head_weights(const ConvLayer& head, Task task) {
  const std::size_t per = static_cast<std::size_t>(head.shape.in_channels) * 9;
  return std::span<const double>(head.weight).subspan(static_cast<std::size_t>(task) * per, per);
}

}  // namespace

void Gradients::zero() {
  for (auto& w : weight) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (std::size_t i = 0; i < weight[l].size(); ++i) weight[l][i] += other.weight[l][i];
    for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
  }
}

void Gradients::scale(double factor) {
  for (auto& w : weight) for (double& v : w) v *= factor;
  for (auto& b : bias) for (double& v : b) v *= factor;
}

CompactNet::CompactNet(NetConfig config) : config_(config) {
  const auto& fc = config.feature_channels;
  const auto& ec = config.encoder_channels;
  const int trunk_in = 2 * fc[2];
  layers_.push_back(make_layer("fe1", 3, fc[0], 1));
  layers_.push_back(make_layer("fe2", fc[0], fc[1], 2));
  layers_.push_back(make_layer("fe3", fc[1], fc[2], 1));
  layers_.push_back(make_layer("enc1", trunk_in, ec[0], 2));
  layers_.push_back(make_layer("enc1b", ec[0], ec[0], 1));
  layers_.push_back(make_layer("enc2", ec[0], ec[1], 2));
  layers_.push_back(make_layer("dec1", ec[1] + ec[0], ec[0], 1));
  layers_.push_back(make_layer("dec2", ec[0] + trunk_in, config.decoder_channels, 1));
  layers_.push_back(make_layer("head", config.decoder_channels, 3, 1));
}

CompactNet::CompactNet(const CompactNet& other)
    : config_(other.config_), layers_(other.layers_), trained_(other.trained_) {}

CompactNet& CompactNet::operator=(const CompactNet& other) {
  config_ = other.config_;
  layers_ = other.layers_;
  trained_ = other.trained_;
  return *this;
}

void CompactNet::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    ConvLayer& layer = layers_[l];
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    if (static_cast<int>(l) == kHead) {
      std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
      continue;
    }
    const double fan_in = layer.shape.in_channels * 9.0;
    const double bound = std::sqrt(6.0 / ((1.0 + kLeakySlope * kLeakySlope) * fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : layer.weight) w = dist(rng);
  }
  trained_ = false;
}

std::size_t CompactNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Gradients CompactNet::make_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.weight.emplace_back(l.weight.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

ImageBuffer CompactNet::conv(int layer, const ImageBuffer& in) const {
  const ConvLayer& l = layers_[static_cast<std::size_t>(layer)];
  ImageBuffer out;
  kernels::conv2d_forward(in, l.weight, l.bias, l.shape, out);
  return out;
}

ImageBuffer CompactNet::conv_backward(int layer, const ImageBuffer& in, const ImageBuffer& dout,
                                      Gradients& g, bool need_input_grad) const {
  const ConvLayer& l = layers_[static_cast<std::size_t>(layer)];
  ImageBuffer din;
  kernels::conv2d_backward(in, l.weight, l.shape, dout, need_input_grad ? &din : nullptr,
                           g.weight[static_cast<std::size_t>(layer)], g.bias[static_cast<std::size_t>(layer)]);
  return din;
}

CompactNet::FeatureCache CompactNet::extract(const ImageBuffer& rgb) const {
  if (rgb.channels() != 3) throw ShapeError("feature extraction expects an RGB image");
  ++feature_calls_;
  FeatureCache c;
  c.input = rgb;
  for (double& v : c.input.values()) v = (v - 0.5) / 0.5;
  c.z1 = conv(kFe1, c.input);
  c.a1 = leaky_relu(c.z1);
  c.z2 = conv(kFe2, c.a1);
  c.a2 = leaky_relu(c.z2);
  c.features = conv(kFe3, c.a2);
  return c;
}

void CompactNet::extract_backward(const FeatureCache& c, const ImageBuffer& dfeatures, Gradients& g) const {
  ImageBuffer d = conv_backward(kFe3, c.a2, dfeatures, g);
  d = conv_backward(kFe2, c.a1, leaky_relu_backward(c.z2, d), g);
  conv_backward(kFe1, c.input, leaky_relu_backward(c.z1, d), g, false);
}

WarpParam CompactNet::feature_warp(const WarpParam& task_param) {
  task_param.validate();
  if (task_param.kind == WarpKind::scale) return task_param;
  return {task_param.kind, -task_param.value / kFeatureStride};
}

ImageBuffer CompactNet::trunk_forward(const ImageBuffer& f0, const ImageBuffer& f1, const WarpParam& task_param,
                                      int out_height, int out_width, TrunkCache* cache) const {
  if (!f0.same_shape(f1)) throw ShapeError("trunk_forward: feature maps differ in shape");
  TrunkCache local;
  TrunkCache& c = cache ? *cache : local;
  c.feature_param = feature_warp(task_param);
  c.task = task_for(task_param.kind);
  c.feature_height = f0.height();
  c.feature_width = f0.width();
  const PaddedImage p0 = pad_to_1p5(f0);
  const PaddedImage p1 = pad_to_1p5(apply_warp(f1, c.feature_param));
  c.pad = p0.record;
  c.x = concat_channels(p0.image, p1.image);
  c.z_enc1 = conv(kEnc1, c.x);
  c.a_enc1 = leaky_relu(c.z_enc1);
  c.z_enc1b = conv(kEnc1b, c.a_enc1);
  c.a_enc1b = leaky_relu(c.z_enc1b);
  c.z_enc2 = conv(kEnc2, c.a_enc1b);
  c.a_enc2 = leaky_relu(c.z_enc2);
  c.cat1 = concat_channels(upsample_nearest(c.a_enc2, c.a_enc1b.height(), c.a_enc1b.width()), c.a_enc1b);
  c.z_dec1 = conv(kDec1, c.cat1);
  c.a_dec1 = leaky_relu(c.z_dec1);
  c.cat2 = concat_channels(upsample_nearest(c.a_dec1, c.x.height(), c.x.width()), c.x);
  c.z_dec2 = conv(kDec2, c.cat2);
  c.a_dec2 = leaky_relu(c.z_dec2);

  const ConvLayer& head = layers_[kHead];
  const double bias = head.bias[static_cast<std::size_t>(c.task)];
  ImageBuffer logit_padded;
  kernels::conv2d_forward(c.a_dec2, head_weights(head, c.task), std::span<const double>(&bias, 1),
                          {head.shape.in_channels, 1, 3, 1, 1}, logit_padded);
  ImageBuffer out = resize_bilinear(crop_back(logit_padded, c.pad), out_height, out_width);
  return out;
}

void CompactNet::trunk_backward(const TrunkCache& c, const ImageBuffer& dlogits, Gradients& g,
                                ImageBuffer& df0, ImageBuffer& df1) const {
  ImageBuffer d = embed_padded(resize_bilinear_adjoint(dlogits, c.feature_height, c.feature_width), c.pad);

  // Head: only the row of the active task carries gradient.
  const ConvLayer& head = layers_[kHead];
  const std::size_t t = static_cast<std::size_t>(c.task);
  const std::size_t per = static_cast<std::size_t>(head.shape.in_channels) * 9;
  std::span<double> dw(g.weight[kHead].data() + t * per, per);
  std::span<double> db(g.bias[kHead].data() + t, 1);
  ImageBuffer da_dec2;
  kernels::conv2d_backward(c.a_dec2, head_weights(head, c.task), {head.shape.in_channels, 1, 3, 1, 1}, d,
                           &da_dec2, dw, db);

  ImageBuffer dcat2 = conv_backward(kDec2, c.cat2, leaky_relu_backward(c.z_dec2, da_dec2), g);
  ImageBuffer dup2, dx;
  split_channels(dcat2, c.a_dec1.channels(), dup2, dx);
  ImageBuffer da_dec1 = upsample_nearest_adjoint(dup2, c.a_dec1.height(), c.a_dec1.width());

  ImageBuffer dcat1 = conv_backward(kDec1, c.cat1, leaky_relu_backward(c.z_dec1, da_dec1), g);
  ImageBuffer dup1, da_enc1b;
  split_channels(dcat1, c.a_enc2.channels(), dup1, da_enc1b);
  ImageBuffer da_enc2 = upsample_nearest_adjoint(dup1, c.a_enc2.height(), c.a_enc2.width());

  ImageBuffer t1 = conv_backward(kEnc2, c.a_enc1b, leaky_relu_backward(c.z_enc2, da_enc2), g);
  for (std::size_t i = 0; i < t1.size(); ++i) da_enc1b.values()[i] += t1.values()[i];
  ImageBuffer da_enc1 = conv_backward(kEnc1b, c.a_enc1, leaky_relu_backward(c.z_enc1b, da_enc1b), g);
  ImageBuffer t2 = conv_backward(kEnc1, c.x, leaky_relu_backward(c.z_enc1, da_enc1), g);
  for (std::size_t i = 0; i < t2.size(); ++i) dx.values()[i] += t2.values()[i];

  ImageBuffer dp0, dp1;
  split_channels(dx, dx.channels() / 2, dp0, dp1);
  const ImageBuffer g0 = crop_back(dp0, c.pad);
  const ImageBuffer g1 = apply_warp_adjoint(crop_back(dp1, c.pad), c.feature_param);
  for (std::size_t i = 0; i < g0.size(); ++i) df0.values()[i] += g0.values()[i];
  for (std::size_t i = 0; i < g1.size(); ++i) df1.values()[i] += g1.values()[i];
}

}  // namespace ttc::nn
