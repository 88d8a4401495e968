#include <doctest.h>

#include <cmath>
#include <functional>

#include "support/testing.hpp"
#include "ttc/classifier.hpp"
#include "ttc/dataset.hpp"
#include "ttc/pipeline.hpp"

using namespace ttc;

namespace {

// Predictor answering B(alpha) from a per-pixel profile function.
class ProfilePredictor final : public PairPredictor {
 public:
  using Profile = std::function<double(int pixel, double alpha)>;
  ProfilePredictor(int h, int w, Profile f) : h_(h), w_(w), f_(std::move(f)) {}
  ProbabilityMap predict(const WarpParam& param) const override {
    ProbabilityMap m;
    m.prob = ImageBuffer(h_, w_);
    m.param = param;
    m.orientation = task_for(param.kind);
    for (int i = 0; i < h_ * w_; ++i) m.prob.values()[static_cast<std::size_t>(i)] = f_(i, param.value);
    return m;
  }
  int height() const override { return h_; }
  int width() const override { return w_; }

 private:
  int h_, w_;
  Profile f_;
};

std::unique_ptr<PairPredictor> oracle_for(const sim::GroundTruth& gt, double softness = 0.0) {
  const OracleClassifier cls(std::make_shared<sim::GroundTruth>(gt), softness);
  return cls.prepare(ImageBuffer(gt.height(), gt.width(), 3), ImageBuffer(gt.height(), gt.width(), 3));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const FrameInterval kT(0.1);

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("sweep construction and validation") {
  const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, 9, 0.1);
  REQUIRE(s.size() == 9);
  CHECK(s.alphas[4] == doctest::Approx(0.9));
  CHECK(s.uniform_step() == doctest::Approx(0.1));
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS((ScaleSweep{{0.5, 0.7, 0.6}, 0.1}).validate(), ConfigError);
  CHECK_THROWS_AS((ScaleSweep{{0.0, 0.7}, 0.1}).validate(), ConfigError);
  CHECK_THROWS_AS((ScaleSweep{{0.5, 0.6, 0.8}, 0.1}).uniform_step(), ConfigError);
  CHECK_THROWS_AS(ScaleSweep::uniform(0.5, 1.3, 1, 0.1), ConfigError);
  const ShiftSweep f = ShiftSweep::uniform(-24.0, 3.2, 16);
  CHECK(f.shifts.back() == doctest::Approx(24.0));
  CHECK(f.uniform_step() == doctest::Approx(3.2));
}

TEST_CASE("geofence examples on a single approaching object") {
  const sim::SceneSpec spec = testing::single_object(10.0, -20.0, 0.0, 0.0, 1.5);
  const sim::RenderedPair p = sim::render_pair(spec);
  const auto pred = oracle_for(p.gt);
  auto object_pixels = [&](const Mask& inside, bool want) {
    int n = 0, agree = 0;
    for (int y = 0; y < p.gt.height(); ++y) {
      for (int x = 0; x < p.gt.width(); ++x) {
        if (p.gt.object_at(y, x) != 1) continue;
        ++n;
        agree += inside(y, x) == want;
      }
    }
    return n > 0 && agree == n;
  };
  const GeofenceMask near = binary_geofence(*pred, Ttc::seconds(1.0), kT);
  CHECK(near.eta == doctest::Approx(0.9));
  CHECK(object_pixels(near.inside, true));
  const GeofenceMask far = binary_geofence(*pred, Ttc::seconds(0.4), kT);
  CHECK(far.eta == doctest::Approx(0.75));
  CHECK(object_pixels(far.inside, false));
  // Background (eta = 1) is never inside a positive-TTC fence.
  CHECK_FALSE(near.inside(0, 0));

  const sim::RenderedPair r = sim::render_pair(testing::single_object(10.0, 10.0));
  const auto rp = oracle_for(r.gt);
  for (double tau : {0.2, 0.5, 1.0, 5.0, 100.0}) {
    CHECK(binary_geofence(*rp, Ttc::seconds(tau), kT).inside.count() == 0);
  }
}

TEST_CASE("geofence errors") {
  const auto pred = oracle_for(testing::eta_truth(ImageBuffer(3, 3, 1, 0.9)));
  CHECK_THROWS_AS(binary_geofence(*pred, Ttc::seconds(-1.0), kT), DomainError);
  CHECK_THROWS_AS(binary_geofence(*pred, Ttc::never(), kT), DomainError);
  try {
    binary_geofence(*pred, Ttc::seconds(0.15), kT);
    FAIL("expected OutOfRangeError");
  } catch (const OutOfRangeError& e) {
    CHECK(std::string(e.what()).find("tau >= 0.2 s") != std::string::npos);
  }
  CHECK_NOTHROW(binary_geofence(*pred, Ttc::seconds(0.2), kT));
}

TEST_CASE("inside the fence exactly where p(eta > eta_i) < 0.5") {
  testing::Gen g(71);
  const ImageBuffer eta = testing::random_image(g, 6, 7, 1, 0.5, 1.3);
  const auto pred = oracle_for(testing::eta_truth(eta), 0.03);
  const GeofenceMask m = binary_geofence(*pred, Ttc::seconds(0.5), kT);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    CHECK(m.inside[i] == (m.prob.prob.values()[i] < 0.5));
    CHECK(m.inside[i] == (eta.values()[i] < 0.8));
  }
  // Probability exactly one half is outside.
  ProbabilityMap half{ImageBuffer(1, 1, 1, 0.5), Task::ttc, WarpParam::scale(0.8), ""};
  CHECK_FALSE(geofence_from_map(half, 0.5, 0.8).inside(0, 0));
}

TEST_CASE("quantization bins and edge ties") {
  const std::vector<double> edges{0.5, 0.7, 0.9, 1.1, 1.3};
  CHECK(quantization_bin(0.8, edges) == 2);
  CHECK(quantization_bin(0.7, edges) == 1);
  CHECK(quantization_bin(0.5, edges) == 0);
  CHECK(quantization_bin(0.45, edges) == 0);
  CHECK(quantization_bin(1.3, edges) == 4);
  CHECK(quantization_bin(1.31, edges) == 5);

  ImageBuffer eta(1, 4);
  eta(0, 0) = 0.8;
  eta(0, 1) = 0.7;
  eta(0, 2) = 1.3;
  eta(0, 3) = 1.4;
  const auto pred = oracle_for(testing::eta_truth(eta));
  const QuantizedTtcMap q = quantized_ttc(*pred, ScaleSweep{edges, 0.1});
  CHECK(q.bin_count() == 6);
  CHECK(q.at(0, 0) == 2);
  CHECK(q.at(0, 1) == 1);
  CHECK(q.at(0, 2) == 4);
  CHECK(q.at(0, 3) == 5);
  CHECK(q.negative_count == 0);
  CHECK(q.probability_count == 4 * 6);
}

TEST_CASE("hard oracle quantization matches direct bin membership") {
  testing::for_all(20, 72, [](testing::Gen& g) {
    ImageBuffer eta = testing::random_image(g, 5, 8, 1, 0.4, 1.4);
    const int n = g.integer(2, 12);
    const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, n, 0.1);
    for (int k = 0; k < 5; ++k) eta.values()[static_cast<std::size_t>(g.integer(0, 39))] = s.alphas[static_cast<std::size_t>(g.integer(0, n - 1))];
    const QuantizedTtcMap q = quantized_ttc(*oracle_for(testing::eta_truth(eta)), s, g.integer(1, 4));
    for (std::size_t i = 0; i < eta.size(); ++i) CHECK(q.bins[i] == quantization_bin(eta.values()[i], s.alphas));
  });
}

TEST_CASE("non-monotone maps clamp negative bin probabilities and take the first maximum") {
  std::vector<ProbabilityMap> maps(3);
  const double b[3] = {0.4, 0.7, 0.1};
  for (int i = 0; i < 3; ++i) maps[static_cast<std::size_t>(i)] = {ImageBuffer(1, 1, 1, b[i]), Task::ttc, WarpParam::scale(0.6 + 0.2 * i), ""};
  const std::vector<double> edges{0.6, 0.8, 1.0};
  // Bins: 1 - 0.4 = 0.6, 0.4 - 0.7 < 0, 0.7 - 0.1 = 0.6, 0.1.
  const QuantizedTtcMap q = quantize_maps(maps, edges);
  CHECK(q.at(0, 0) == 0);
  CHECK(q.negative_count == 1);
  CHECK(q.negative_rate() == doctest::Approx(0.25));
  CHECK_THROWS_AS(quantize_maps(std::span(maps).first(2), edges), ConfigError);
  CHECK_THROWS_AS(quantize_maps(maps, std::vector<double>{0.6, 0.6, 1.0}), ConfigError);
  CHECK_THROWS_AS(quantized_ttc(*oracle_for(testing::eta_truth(ImageBuffer(1, 1, 1, 1.0))), ScaleSweep{{0.9}, 0.1}),
                  ConfigError);
}

TEST_CASE("soft oracle recovers the true bin away from the edges") {
  const sim::Dataset d = sim::generate_dataset(8, sim::GeneratorConfig{}, 17);
  const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, 24, 0.1);
  const double step = s.uniform_step();
  std::size_t eligible = 0, correct = 0;
  for (const auto& sample : d.samples) {
    const QuantizedTtcMap q = quantized_ttc(*oracle_for(sample.gt, 0.02), s);
    for (std::size_t i = 0; i < q.bins.size(); ++i) {
      if (!sample.gt.valid[i]) continue;
      const double eta = sample.gt.eta.values()[i];
      bool off_edge = true;
      for (double a : s.alphas) off_edge = off_edge && std::abs(eta - a) >= step / 10;
      if (!off_edge) continue;
      ++eligible;
      correct += q.bins[i] == quantization_bin(eta, s.alphas);
    }
  }
  REQUIRE(eligible > 1000);
  CHECK(static_cast<double>(correct) >= 0.99 * static_cast<double>(eligible));
}

TEST_CASE("AUC estimator examples") {
  const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, 9, 0.1);
  auto run = [&](std::function<double(double)> b) {
    const ProfilePredictor pred(1, 1, [&](int, double a) { return b(a); });
    return continuous_eta(pred, s).eta(0, 0);
  };
  CHECK(run([](double a) { return a < 0.8 - 1e-9 ? 1.0 : 0.0; }) == doctest::Approx(0.75));
  CHECK(run([](double) { return 1.0; }) == doctest::Approx(1.35));
  CHECK(run([](double) { return 0.0; }) == doctest::Approx(0.45));
  std::vector<ImageBuffer> raw(9, ImageBuffer(1, 1, 1, 2.0));
  CHECK(auc_estimate(raw, 0.5, 0.1)(0, 0) == doctest::Approx(1.35));
  CHECK_THROWS_AS(auc_estimate(std::vector<ImageBuffer>{}, 0.5, 0.1), ConfigError);
  CHECK_THROWS_AS(auc_estimate(std::vector<ImageBuffer>{ImageBuffer(1, 1), ImageBuffer(1, 2)}, 0.5, 0.1), ShapeError);
  const ProfilePredictor p(1, 1, [](int, double) { return 0.5; });
  CHECK_THROWS_AS(continuous_eta(p, ScaleSweep{{0.5, 0.6, 0.8}, 0.1}), ConfigError);
}

TEST_CASE("AUC error stays within half a step for steps and symmetric monotone profiles") {
  testing::for_all(300, 73, [](testing::Gen& g) {
    const int n = g.integer(6, 30);
    const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, n, 0.1);
    const double step = s.uniform_step();
    const double width = g.uniform(0.0, 0.1);
    const double star = g.uniform(0.5 + width + step, 1.3 - width - step);
    const int kind = g.integer(0, 2);
    // Odd-symmetric transitions about star that saturate within `width`.
    auto profile = [=](int, double a) {
      const double d = a - star;
      if (kind == 0 || width == 0.0) return d < 0 ? 1.0 : (d > 0 ? 0.0 : 0.5);
      if (kind == 1) return std::clamp(0.5 - d / (2 * width), 0.0, 1.0);
      const double t = std::clamp(d / width, -1.0, 1.0);
      return 0.5 - 0.5 * std::sin(t * M_PI / 2);
    };
    const ProfilePredictor pred(1, 1, profile);
    CHECK(std::abs(continuous_eta(pred, s).eta(0, 0) - star) <= step / 2 + 1e-12);
  });
}

TEST_CASE("AUC error of a logistic profile is tiny once softness is at least a quarter step") {
  for (int n : {9, 17, 24}) {
    const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, n, 0.1);
    const double step = s.uniform_step();
    for (double soft_steps : {0.25, 0.5, 1.0}) {
      const double softness = soft_steps * step;
      // The profile must saturate inside the sweep: keep 8 softness units of
      // margin on both sides.
      const double lo = 0.5 + 8 * softness, hi = 1.3 - 8 * softness;
      if (hi - lo < 0.2) continue;
      double worst = 0;
      for (int k = 0; k <= 200; ++k) {
        const double star = lo + k * (hi - lo) / 200;
        const ProfilePredictor pred(1, 1, [&](int, double a) { return logistic((star - a) / softness); });
        worst = std::max(worst, std::abs(continuous_eta(pred, s).eta(0, 0) - star));
      }
      CAPTURE(n);
      CAPTURE(soft_steps);
      CHECK(worst <= step / 20);
    }
  }
}

TEST_CASE("asymmetric monotone profiles can exceed the half-step bound") {
  // Sharp drop then a long shallow tail: the median crossing sits at the drop
  // but the tail adds area.
  const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, 9, 0.1);
  const double star = 0.8;
  const ProfilePredictor pred(1, 1, [&](int, double a) {
    if (a < star) return 1.0;
    return std::max(0.0, 0.49 * (1.0 - (a - star) / 0.45));
  });
  CHECK(std::abs(continuous_eta(pred, s).eta(0, 0) - star) > 0.05);
}

TEST_CASE("quantized bins agree with the continuous estimate and the geofence") {
  const sim::Dataset d = sim::generate_dataset(4, sim::GeneratorConfig{}, 23);
  const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, 17, 0.1);
  const double step = s.uniform_step();
  for (const auto& sample : d.samples) {
    const auto pred = oracle_for(sample.gt);
    const QuantizedTtcMap q = quantized_ttc(*pred, s);
    const ContinuousEta c = continuous_eta(*pred, s);
    for (std::size_t i = 0; i < q.bins.size(); ++i) {
      if (!sample.gt.valid[i]) continue;
      const double eta = sample.gt.eta.values()[i];
      bool off_edge = true;
      for (double a : s.alphas) off_edge = off_edge && std::abs(eta - a) >= step / 10;
      if (off_edge) CHECK(q.bins[i] == quantization_bin(c.eta.values()[i], s.alphas));
    }
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double eta_i = s.alphas[j];
      if (eta_i >= 1.0) continue;
      const GeofenceMask fence = binary_geofence(*pred, Ttc::seconds(0.1 / (1.0 - eta_i)), kT);
      for (std::size_t i = 0; i < q.bins.size(); ++i) {
        REQUIRE(fence.inside[i] == (q.bins[i] <= static_cast<int>(j)));
      }
    }
  }
}

TEST_CASE("removing an edge only merges its two neighbouring bins") {
  testing::for_all(20, 74, [](testing::Gen& g) {
    const ImageBuffer eta = testing::random_image(g, 6, 6, 1, 0.4, 1.4);
    const auto pred = oracle_for(testing::eta_truth(eta));
    const ScaleSweep full = ScaleSweep::uniform(0.5, 1.3, 9, 0.1);
    const std::size_t j = static_cast<std::size_t>(g.integer(0, 8));
    ScaleSweep less = full;
    less.alphas.erase(less.alphas.begin() + static_cast<std::ptrdiff_t>(j));
    const QuantizedTtcMap a = quantized_ttc(*pred, full), b = quantized_ttc(*pred, less);
    const int jj = static_cast<int>(j);
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
      const int expect = a.bins[i] <= jj ? a.bins[i] : a.bins[i] - 1;
      if (a.bins[i] != jj && a.bins[i] != jj + 1) CHECK(b.bins[i] == expect);
      else CHECK(b.bins[i] == jj);
    }
  });
}

TEST_CASE("continuous motion-in-depth and TTC from the hard oracle") {
  const sim::Dataset d = sim::generate_dataset(3, sim::GeneratorConfig{}, 29);
  const ScaleSweep s = ScaleSweep::uniform(0.5, 1.3, 24, 0.1);
  for (const auto& sample : d.samples) {
    const ContinuousEta c = continuous_eta(*oracle_for(sample.gt), s, 2);
    for (int y = 0; y < c.eta.height(); ++y) {
      for (int x = 0; x < c.eta.width(); ++x) {
        if (!sample.gt.valid(y, x)) continue;
        CHECK(std::abs(c.eta(y, x) - sample.gt.eta(y, x)) <= s.uniform_step() / 2 + 1e-12);
        CHECK(c.ttc.at(y, x) == ttc_from_eta(Eta(c.eta(y, x)), kT));
      }
    }
  }
}

TEST_CASE("continuous flow examples") {
  sim::GroundTruth gt = testing::eta_truth(ImageBuffer(2, 3, 1, 1.0));
  gt.flow_u.fill(6.0);
  const auto pred = oracle_for(gt);
  const FlowEstimate f = continuous_flow(*pred, ShiftSweep::uniform(0.0, 3.0, 8), ShiftSweep::uniform(-9.0, 3.0, 8));
  for (double u : f.u.values()) CHECK(std::abs(u - 6.0) <= 1.5);
  for (double v : f.v.values()) CHECK(std::abs(v) <= 1.5);
  const sim::RenderedPair still = sim::render_pair(testing::single_object(8.0, 0.0));
  const ShiftSweep grid = ShiftSweep::uniform(-24.0, 3.2, 16);
  const FlowEstimate z = continuous_flow(*oracle_for(still.gt), grid, grid, 3);
  for (double u : z.u.values()) CHECK(std::abs(u) <= 1.6);
  for (double v : z.v.values()) CHECK(std::abs(v) <= 1.6);
}

TEST_CASE("sweep results are identical for any parallelism") {
  nn::CompactNet net(nn::NetConfig::toy());
  net.initialize(5);
  testing::Gen g(75);
  for (auto& l : net.layers()) for (double& w : l.weight) w = g.uniform(-0.5, 0.5);
  net.set_trained(true);
  const ImageBuffer i0 = testing::random_image(g, 16, 32, 3, 0, 1), i1 = testing::random_image(g, 16, 32, 3, 0, 1);
  const auto pred = NetClassifier(net).prepare(i0, i1);
  std::vector<WarpParam> jobs;
  for (int i = 0; i < 8; ++i) jobs.push_back(WarpParam::scale(0.5 + 0.1 * i));
  jobs.push_back(WarpParam::shift_h(4.0));
  jobs.push_back(WarpParam::shift_v(-6.0));
  const SweepResult serial = sweep_executor(*pred, jobs, 1);
  CHECK(serial.seconds >= 0.0);
  for (int workers : {2, 8}) {
    const SweepResult par = sweep_executor(*pred, jobs, workers);
    REQUIRE(par.maps.size() == jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      CHECK(par.maps[i].prob == serial.maps[i].prob);
      CHECK(par.maps[i].param.value == jobs[i].value);
    }
  }
  CHECK(serial.maps[8].orientation == Task::flow_u);
  CHECK(serial.maps[0].prob == pred->predict(jobs[0]).prob);
}

}  // TEST_SUITE
