#include "ttc/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ttc/errors.hpp"
#include "ttc/nn/losses.hpp"
#include "ttc/nn/ops.hpp"
#include "ttc/pipeline.hpp"
#include "ttc/random.hpp"

namespace ttc::nn {

namespace {

struct Draw {
  double alpha = 1.0;
  double u = 0.0;
  double v = 0.0;
  // Focused draws center the task parameters on the motion of one moving
  // pixel, chosen by `pick`, plus the jitters.
  bool focus = false;
  double pick = 0.0, jitter_alpha = 0.0, jitter_u = 0.0, jitter_v = 0.0;
};

struct TaskLosses {
  double ttc = 0.0, flow_u = 0.0, flow_v = 0.0, total = 0.0;
};

const ImageBuffer& quantity(const sim::GroundTruth& gt, Task task) {
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

Mask threshold_mask(const ImageBuffer& q, double threshold) {
  Mask m(q.height(), q.width());
  const auto v = q.values();
  for (std::size_t i = 0; i < v.size(); ++i) m.set(i, v[i] > threshold);
  return m;
}

WarpParam param_for(Task task, double value) {
  switch (task) {
    case Task::ttc:
      return WarpParam::scale(value);
    case Task::flow_u:
      return WarpParam::shift_h(value);
    case Task::flow_v:
      return WarpParam::shift_v(value);
  }
  return WarpParam::scale(value);
}

double& slot(TaskLosses& l, Task task) {
  return task == Task::ttc ? l.ttc : task == Task::flow_u ? l.flow_u : l.flow_v;
}

std::array<double, 3> task_weights(const TrainConfig& c, bool flow_only) {
  if (flow_only) return {0.0, 0.5, 0.5};
  return {c.ttc_weight, 0.5 * c.flow_weight, 0.5 * c.flow_weight};
}

std::vector<Draw> draw_params(const TrainConfig& c, std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> alpha(c.alpha_min, c.alpha_max);
  const int half = static_cast<int>(std::floor(c.shift_max / 2.0));
  std::uniform_int_distribution<int> shift(-half, half);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Draw> draws(n);
  for (Draw& d : draws) {
    d.alpha = alpha(rng);
    d.u = 2.0 * shift(rng);
    d.v = 2.0 * shift(rng);
    if (c.focus_fraction > 0.0) {
      d.focus = unit(rng) < c.focus_fraction;
      d.pick = unit(rng);
      d.jitter_alpha = c.focus_eta_jitter * (2.0 * unit(rng) - 1.0);
      d.jitter_u = c.focus_shift_jitter * (2.0 * unit(rng) - 1.0);
      d.jitter_v = c.focus_shift_jitter * (2.0 * unit(rng) - 1.0);
    }
  }
  return draws;
}

// Resolves a focused draw against the sample's ground truth. Samples without
// moving pixels keep the uniform draw.
Draw resolve_draw(const Draw& d, const sim::Sample& s, const TrainConfig& c) {
  if (!d.focus) return d;
  const auto eta = s.gt.eta.values(), fu = s.gt.flow_u.values(), fv = s.gt.flow_v.values();
  std::vector<std::size_t> moving;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (s.gt.valid[i] && (eta[i] != 1.0 || fu[i] != 0.0 || fv[i] != 0.0)) moving.push_back(i);
  }
  if (moving.empty()) return d;
  const std::size_t i = moving[std::min(moving.size() - 1, static_cast<std::size_t>(d.pick * moving.size()))];
  const double limit = 2.0 * std::floor(c.shift_max / 2.0);
  auto even = [&](double x) { return std::clamp(2.0 * std::round(x / 2.0), -limit, limit); };
  Draw r = d;
  r.alpha = std::clamp(eta[i] + d.jitter_alpha, c.alpha_min, c.alpha_max);
  r.u = even(fu[i] + d.jitter_u);
  r.v = even(fv[i] + d.jitter_v);
  return r;
}

// Loss and parameter gradients of one pair for the binary stage.
TaskLosses binary_example(const CompactNet& net, const sim::Sample& s, const Draw& d,
                          const std::array<double, 3>& weights, Gradients* g) {
  const auto c0 = net.extract(s.i0);
  const auto c1 = net.extract(s.i1);
  const ImageBuffer& f = c0.features;
  ImageBuffer df0(f.height(), f.width(), f.channels());
  ImageBuffer df1(f.height(), f.width(), f.channels());
  TaskLosses out;
  const double values[3] = {d.alpha, d.u, d.v};
  for (int t = 0; t < 3; ++t) {
    if (weights[t] == 0.0) continue;
    const Task task = static_cast<Task>(t);
    CompactNet::TrunkCache cache;
    const ImageBuffer logits = net.trunk_forward(c0.features, c1.features, param_for(task, values[t]),
                                                 s.i0.height(), s.i0.width(), g ? &cache : nullptr);
    const Mask target = threshold_mask(quantity(s.gt, task), values[t]);
    LossResult bce = bce_logits_loss(logits, target, s.gt.valid);
    slot(out, task) = bce.loss;
    out.total += weights[t] * bce.loss;
    if (g) {
      ImageBuffer& dl = bce.grad;
      for (double& v : dl.values()) v *= weights[t];
      net.trunk_backward(cache, dl, *g, df0, df1);
    }
  }
  if (g) {
    net.extract_backward(c0, df0, *g);
    net.extract_backward(c1, df1, *g);
  }
  return out;
}

// Loss and gradients of one pair for the continuous stage. Every sweep map
// is computed once to form the AUC estimate, then recomputed with caches
// and back-propagated one at a time to bound memory.
TaskLosses continuous_example(const CompactNet& net, const sim::Sample& s, const TrainConfig& c,
                              const std::vector<double>& scales, const std::vector<double>& shifts,
                              Gradients& g) {
  const auto c0 = net.extract(s.i0);
  const auto c1 = net.extract(s.i1);
  const ImageBuffer& f = c0.features;
  ImageBuffer df0(f.height(), f.width(), f.channels());
  ImageBuffer df1(f.height(), f.width(), f.channels());
  const int h = s.i0.height();
  const int w = s.i0.width();
  const auto weights = task_weights(c, false);
  TaskLosses out;
  for (int t = 0; t < 3; ++t) {
    const Task task = static_cast<Task>(t);
    const std::vector<double>& grid = task == Task::ttc ? scales : shifts;
    const double first = grid.front();
    const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    const ImageBuffer& gt = quantity(s.gt, task);

    std::vector<ImageBuffer> logits, probs;
    logits.reserve(grid.size());
    probs.reserve(grid.size());
    for (double value : grid) {
      logits.push_back(net.trunk_forward(c0.features, c1.features, param_for(task, value), h, w));
      probs.push_back(sigmoid(logits.back()));
    }
    const ImageBuffer est = auc_estimate(probs, first, step);
    LossResult reg = smooth_l1_loss(est, gt, s.gt.valid);
    // The clamp blocks the gradient where the raw estimate leaves the range.
    const double lo = first - 0.5 * step;
    const double hi = grid.back() + 0.5 * step;
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double e = est.values()[i];
      if (e <= lo || e >= hi) reg.grad.values()[i] = 0.0;
    }
    double bce_sum = 0.0;
    std::vector<ImageBuffer> bce_grads;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      LossResult bce = bce_logits_loss(logits[i], threshold_mask(gt, grid[i]), s.gt.valid);
      bce_sum += bce.loss;
      bce_grads.push_back(std::move(bce.grad));
    }
    logits.clear();
    const double n_maps = static_cast<double>(grid.size());
    const double loss = c.bce_weight * bce_sum / n_maps + c.regression_weight * reg.loss;
    slot(out, task) = loss;
    out.total += weights[t] * loss;

    for (std::size_t i = 0; i < grid.size(); ++i) {
      CompactNet::TrunkCache cache;
      net.trunk_forward(c0.features, c1.features, param_for(task, grid[i]), h, w, &cache);
      const ImageBuffer& p = probs[i];
      ImageBuffer& dl = bce_grads[i];
      for (std::size_t k = 0; k < dl.size(); ++k) {
        const double pk = p.values()[k];
        const double d_auc = c.regression_weight * step * reg.grad.values()[k] * pk * (1.0 - pk);
        dl.values()[k] = weights[t] * (c.bce_weight / n_maps * dl.values()[k] + d_auc);
      }
      net.trunk_backward(cache, dl, g, df0, df1);
    }
  }
  net.extract_backward(c0, df0, g);
  net.extract_backward(c1, df1, g);
  return out;
}

// Visiting order and task parameters of a binary-stage epoch.
void epoch_plan(const TrainConfig& c, int epoch, std::size_t n, std::vector<std::size_t>& order,
                std::vector<Draw>& draws) {
  std::mt19937_64 rng(derive_seed(c.seed, static_cast<std::uint64_t>(epoch)));
  order.resize(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  draws = draw_params(c, rng, n);
}

void check_finite(const TaskLosses& l, std::uint64_t step) {
  if (!std::isfinite(l.total)) {
    throw DivergenceError("training diverged: non-finite loss at step " + std::to_string(step) +
                          " (ttc " + std::to_string(l.ttc) + ", flow_u " + std::to_string(l.flow_u) +
                          ", flow_v " + std::to_string(l.flow_v) + "); lower the learning rate");
  }
}

void optimizer_step(CompactNet& net, TrainState& state, const Gradients& g, const TrainConfig& c) {
  const bool adam = c.optimizer == Optimizer::adam;
  if (!state.has_velocity) {
    state.velocity = net.make_gradients();
    if (adam) state.second_moment = net.make_gradients();
    state.has_velocity = true;
  }
  // Adam bias correction uses the number of updates taken in this stage.
  const double t = static_cast<double>(state.stage_steps + 1);
  const double c1 = 1.0 - std::pow(c.momentum, t);
  const double c2 = 1.0 - std::pow(c.adam_beta2, t);
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>* v,
                      const std::vector<double>& d) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (adam) {
          m[i] = c.momentum * m[i] + (1.0 - c.momentum) * d[i];
          (*v)[i] = c.adam_beta2 * (*v)[i] + (1.0 - c.adam_beta2) * d[i] * d[i];
          p[i] -= state.learning_rate * (m[i] / c1) / (std::sqrt((*v)[i] / c2) + c.adam_epsilon);
        } else {
          m[i] = c.momentum * m[i] + d[i];
          p[i] -= state.learning_rate * m[i];
        }
      }
    };
    update(layers[l].weight, state.velocity.weight[l], adam ? &state.second_moment.weight[l] : nullptr, g.weight[l]);
    update(layers[l].bias, state.velocity.bias[l], adam ? &state.second_moment.bias[l] : nullptr, g.bias[l]);
  }
  ++state.stage_steps;
}

void end_epoch(TrainState& state, double epoch_loss, const TrainConfig& c) {
  if (epoch_loss < state.best_loss) {
    state.best_loss = epoch_loss;
    state.plateau = 0;
  } else if (++state.plateau >= c.plateau_patience) {
    state.learning_rate *= c.lr_decay;
    state.plateau = 0;
  }
  ++state.epoch;
}

void record(TrainResult& r, std::uint64_t step, const TaskLosses& l, const std::array<double, 3>& weights) {
  if (weights[0] > 0.0) r.losses.push_back({step, "ttc", l.ttc});
  if (weights[1] > 0.0) r.losses.push_back({step, "flow_u", l.flow_u});
  if (weights[2] > 0.0) r.losses.push_back({step, "flow_v", l.flow_v});
  r.losses.push_back({step, "total", l.total});
}

// Runs `fn(k, grads_k)` for every example of a batch, in parallel, and
// reduces the gradients and losses in example order.
template <class Fn>
TaskLosses run_batch(const CompactNet& net, std::size_t count, int parallelism, Gradients& sum, Fn fn) {
  std::vector<Gradients> grads(count, net.make_gradients());
  std::vector<TaskLosses> losses(count);
  const int n = static_cast<int>(count);
#pragma omp parallel for num_threads(std::max(1, parallelism)) schedule(static, 1)
  for (int k = 0; k < n; ++k) losses[static_cast<std::size_t>(k)] = fn(static_cast<std::size_t>(k), grads[static_cast<std::size_t>(k)]);
  sum.zero();
  TaskLosses mean;
  for (std::size_t k = 0; k < count; ++k) {
    sum.add(grads[k]);
    mean.ttc += losses[k].ttc / count;
    mean.flow_u += losses[k].flow_u / count;
    mean.flow_v += losses[k].flow_v / count;
    mean.total += losses[k].total / count;
  }
  sum.scale(1.0 / static_cast<double>(count));
  return mean;
}

void begin_stage(TrainState& state, const std::string& stage, double lr) {
  if (state.stage != stage) {
    state.stage = stage;
    state.epoch = 0;
    state.learning_rate = lr;
    state.best_loss = std::numeric_limits<double>::infinity();
    state.plateau = 0;
    state.stage_steps = 0;
    state.has_velocity = false;
    state.velocity = {};
    state.second_moment = {};
  }
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("training config: " + m); };
  if (!(learning_rate > 0.0) || !(continuous_learning_rate > 0.0)) fail("learning rates must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) fail("lr_decay must be in (0, 1]");
  if (plateau_patience < 1) fail("plateau_patience must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 0 || pretrain_epochs < 0 || continuous_epochs < 0) fail("epoch counts must be >= 0");
  if (pretrain_epochs > epochs) fail("pretrain_epochs must not exceed epochs");
  if (std::abs(ttc_weight + flow_weight - 1.0) > 1e-9 || ttc_weight < 0.0 || flow_weight < 0.0) {
    fail("task weights must be non-negative and sum to 1");
  }
  if (std::abs(bce_weight + regression_weight - 1.0) > 1e-9 || bce_weight < 0.0 || regression_weight < 0.0) {
    fail("continuous-stage weights must be non-negative and sum to 1");
  }
  if (!(alpha_min > 0.0 && alpha_min < alpha_max)) fail("alpha range must satisfy 0 < min < max");
  if (!(shift_max >= 2.0)) fail("shift_max must be >= 2");
  if (continuous_scales < 2 || continuous_shifts < 2) fail("continuous sweeps need >= 2 samples");
  if (continuous_pairs < 0) fail("continuous_pairs must be >= 0");
  if (!(focus_fraction >= 0.0 && focus_fraction <= 1.0)) fail("focus_fraction must be in [0, 1]");
  if (!(focus_eta_jitter >= 0.0) || !(focus_shift_jitter >= 0.0)) fail("focus jitters must be >= 0");
  if (parallelism < 1) fail("parallelism must be >= 1");
}

double continuous_objective(const CompactNet& net, const sim::Sample& sample, const TrainConfig& config,
                            Gradients* grads) {
  config.validate();
  Gradients local = grads ? Gradients{} : net.make_gradients();
  return continuous_example(net, sample, config, continuous_scale_grid(config), continuous_shift_grid(config),
                            grads ? *grads : local)
      .total;
}

std::vector<double> continuous_scale_grid(const TrainConfig& c) {
  return ScaleSweep::uniform(c.alpha_min, c.alpha_max, c.continuous_scales, 0.1).alphas;
}

std::vector<double> continuous_shift_grid(const TrainConfig& c) {
  const double step = 2.0 * c.shift_max / (c.continuous_shifts - 1);
  return ShiftSweep::uniform(-c.shift_max, step, c.continuous_shifts).shifts;
}

TrainResult train_binary(CompactNet& net, const sim::Dataset& data, const TrainConfig& config, TrainState& state,
                         const EpochHook& hook) {
  config.validate();
  if (data.samples.empty()) throw ConfigError("training dataset is empty");
  if (state.stage == "continuous") throw ConfigError("binary training cannot resume a continuous-stage state");
  begin_stage(state, "binary", config.learning_rate);
  TrainResult result;
  Gradients g = net.make_gradients();
  const std::size_t n = data.samples.size();
  while (state.epoch < config.epochs) {
    const int epoch = state.epoch;
    std::vector<std::size_t> order;
    std::vector<Draw> draws;
    epoch_plan(config, epoch, n, order, draws);
    const bool flow_only = epoch < config.pretrain_epochs;
    if (epoch == config.pretrain_epochs && epoch > 0) {
      // The objective changes when the TTC head joins.
      state.best_loss = std::numeric_limits<double>::infinity();
      state.plateau = 0;
    }
    const auto weights = task_weights(config, flow_only);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < n; b += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, n - b);
      const TaskLosses l = run_batch(net, count, config.parallelism, g, [&](std::size_t k, Gradients& gk) {
        const std::size_t i = order[b + k];
        return binary_example(net, data.samples[i], resolve_draw(draws[b + k], data.samples[i], config), weights,
                              &gk);
      });
      check_finite(l, state.step);
      optimizer_step(net, state, g, config);
      record(result, state.step, l, weights);
      ++state.step;
      epoch_loss += l.total * static_cast<double>(count);
    }
    end_epoch(state, epoch_loss / static_cast<double>(n), config);
    net.set_trained(true);
    if (hook && !hook(net, state)) return result;
  }
  result.finished = true;
  return result;
}

TrainResult train_continuous(CompactNet& net, const sim::Dataset& data, const TrainConfig& config,
                             TrainState& state, const EpochHook& hook) {
  config.validate();
  if (state.stage != "binary" && state.stage != "continuous") {
    throw ConfigError("continuous training requires a binary-stage checkpoint (found stage '" + state.stage + "')");
  }
  if (state.stage == "binary" && state.epoch == 0) {
    throw ConfigError("continuous training requires a completed binary stage");
  }
  if (data.samples.empty()) throw ConfigError("training dataset is empty");
  begin_stage(state, "continuous", config.continuous_learning_rate);
  const auto scales = continuous_scale_grid(config);
  const auto shifts = continuous_shift_grid(config);
  const auto weights = task_weights(config, false);
  TrainResult result;
  Gradients g = net.make_gradients();
  const std::size_t n = data.samples.size();
  const std::size_t per_epoch =
      config.continuous_pairs > 0 ? std::min<std::size_t>(n, static_cast<std::size_t>(config.continuous_pairs)) : n;
  while (state.epoch < config.continuous_epochs) {
    std::mt19937_64 rng(derive_seed(config.seed ^ 0xC0u, static_cast<std::uint64_t>(state.epoch)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < per_epoch; b += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, per_epoch - b);
      const TaskLosses l = run_batch(net, count, config.parallelism, g, [&](std::size_t k, Gradients& gk) {
        return continuous_example(net, data.samples[order[b + k]], config, scales, shifts, gk);
      });
      check_finite(l, state.step);
      optimizer_step(net, state, g, config);
      record(result, state.step, l, weights);
      ++state.step;
      epoch_loss += l.total * static_cast<double>(count);
    }
    end_epoch(state, epoch_loss / static_cast<double>(per_epoch), config);
    if (hook && !hook(net, state)) return result;
  }
  result.finished = true;
  return result;
}

double epoch_objective(const CompactNet& net, const sim::Dataset& data, const TrainConfig& config, int epoch) {
  std::vector<std::size_t> order;
  std::vector<Draw> draws;
  epoch_plan(config, epoch, data.samples.size(), order, draws);
  const auto weights = task_weights(config, epoch < config.pretrain_epochs);
  double total = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const sim::Sample& sample = data.samples[order[k]];
    total += binary_example(net, sample, resolve_draw(draws[k], sample, config), weights, nullptr).total;
  }
  return data.samples.empty() ? 0.0 : total / static_cast<double>(data.samples.size());
}

double binary_objective(const CompactNet& net, const sim::Dataset& data, const TrainConfig& config,
                        std::uint64_t draw_seed) {
  std::mt19937_64 rng(draw_seed);
  const auto draws = draw_params(config, rng, data.samples.size());
  const auto weights = task_weights(config, false);
  double total = 0.0;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    total += binary_example(net, data.samples[i], resolve_draw(draws[i], data.samples[i], config), weights, nullptr)
                 .total;
  }
  return data.samples.empty() ? 0.0 : total / static_cast<double>(data.samples.size());
}

}  // namespace ttc::nn
