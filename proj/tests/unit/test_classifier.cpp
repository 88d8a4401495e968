#include <doctest.h>

#include <cmath>

#include "support/testing.hpp"
#include "ttc/classifier.hpp"

using namespace ttc;

TEST_SUITE("classifier") {

TEST_CASE("oracle examples") {
  const sim::GroundTruth gt = testing::eta_truth(ImageBuffer(4, 6, 1, 0.9));
  const ProbabilityMap hard = oracle_predict(gt, Task::ttc, WarpParam::scale(0.8), 0.0);
  for (double v : hard.prob.values()) CHECK(v == 1.0);
  CHECK(hard.orientation == Task::ttc);
  const ProbabilityMap mid = oracle_predict(gt, Task::ttc, WarpParam::scale(0.9), 0.05);
  for (double v : mid.prob.values()) CHECK(v == 0.5);
  CHECK_THROWS_AS(oracle_predict(gt, Task::ttc, WarpParam::shift_h(1.0), 0.0), ConfigError);
  CHECK_THROWS_AS(oracle_predict(gt, Task::flow_u, WarpParam::scale(1.0), 0.0), ConfigError);
}

TEST_CASE("hard oracle equals a per-pixel comparison") {
  testing::for_all(20, 61, [](testing::Gen& g) {
    sim::GroundTruth gt = testing::eta_truth(testing::random_image(g, 7, 9, 1, 0.5, 1.3));
    gt.flow_u = testing::random_image(g, 7, 9, 1, -20, 20);
    gt.flow_v = testing::random_image(g, 7, 9, 1, -20, 20);
    const double a = g.uniform(0.5, 1.3), u = g.uniform(-20, 20);
    const ProbabilityMap pe = oracle_predict(gt, Task::ttc, WarpParam::scale(a), 0.0);
    const ProbabilityMap pu = oracle_predict(gt, Task::flow_u, WarpParam::shift_h(u), 0.0);
    const ProbabilityMap pv = oracle_predict(gt, Task::flow_v, WarpParam::shift_v(u), 0.0);
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 9; ++x) {
        CHECK(pe.prob(y, x) == (gt.eta(y, x) > a ? 1.0 : 0.0));
        CHECK(pu.prob(y, x) == (gt.flow_u(y, x) > u ? 1.0 : 0.0));
        CHECK(pv.prob(y, x) == (gt.flow_v(y, x) > u ? 1.0 : 0.0));
      }
    }
    const double s = g.uniform(0.01, 0.2);
    const ProbabilityMap soft = oracle_predict(gt, Task::ttc, WarpParam::scale(a), s);
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 9; ++x) {
        CHECK(soft.prob(y, x) == doctest::Approx(1.0 / (1.0 + std::exp(-(gt.eta(y, x) - a) / s))).epsilon(1e-12));
      }
    }
  });
}

TEST_CASE("oracle classifier answers through the predictor interface") {
  auto gt = std::make_shared<sim::GroundTruth>(testing::eta_truth(ImageBuffer(5, 5, 1, 1.1)));
  const OracleClassifier cls(gt, 0.0);
  const ImageBuffer img(5, 5, 3);
  const auto pred = cls.prepare(img, img);
  CHECK(pred->height() == 5);
  CHECK(pred->width() == 5);
  CHECK(pred->predict(WarpParam::scale(1.2)).prob == ImageBuffer(5, 5, 1, 0.0));
  CHECK(pred->predict(WarpParam::scale(1.0)).prob == ImageBuffer(5, 5, 1, 1.0));
  CHECK_THROWS_AS(cls.prepare(ImageBuffer(4, 5, 3), img), ShapeError);
  CHECK_THROWS_AS(OracleClassifier(gt, -1.0), ConfigError);
}

}  // TEST_SUITE
