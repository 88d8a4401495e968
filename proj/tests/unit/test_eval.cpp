#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support/testing.hpp"
#include "ttc/dataset.hpp"
#include "ttc/eval.hpp"
#include "ttc/image_io.hpp"

using namespace ttc;
using namespace ttc::eval;

namespace {

Mask stripe(int h, int w, int x0, int x1) {
  Mask m(h, w);
  for (int y = 0; y < h; ++y) for (int x = x0; x < x1; ++x) m.set(y, x, true);
  return m;
}

Mask complement(const Mask& m) {
  Mask c(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) c.set(i, !m[i]);
  return c;
}

// Metrics of a report without its timing lines.
std::string metrics_csv(const EvalReport& r) {
  const std::string csv = r.to_csv();
  return csv.substr(0, csv.find("time_"));
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("mIOU examples") {
  const Mask valid(10, 20, true);
  const Mask gt = stripe(10, 20, 0, 5);
  CHECK(miou(gt, gt, valid) == 1.0);
  CHECK(miou(complement(gt), gt, valid) == 0.0);
  CHECK(miou(stripe(10, 20, 0, 10), gt, valid) == doctest::Approx(0.5));
  CHECK(miou(Mask(10, 20), Mask(10, 20), valid) == 1.0);
  CHECK_THROWS_AS(miou(Mask(10, 21), gt, valid), ShapeError);
}

TEST_CASE("percentage error examples") {
  const Mask valid(10, 20, true);
  const Mask gt = stripe(10, 20, 3, 9);
  CHECK(pct_error(gt, gt, valid) == 0.0);
  CHECK(pct_error(complement(gt), gt, valid) == 100.0);
  Mask one = gt;
  one.set(0, 0, true);
  CHECK(pct_error(one, gt, valid) == doctest::Approx(0.5));
  CHECK_THROWS_AS(pct_error(gt, gt, Mask(10, 20)), DomainError);
}

TEST_CASE("mask metrics are bounded, ignore invalid pixels and pixel order") {
  testing::for_all(50, 101, [](testing::Gen& g) {
    const int n = g.integer(1, 60);
    Mask a(1, n), b(1, n), v(1, n);
    for (int i = 0; i < n; ++i) {
      a.set(static_cast<std::size_t>(i), g.coin());
      b.set(static_cast<std::size_t>(i), g.coin());
      v.set(static_cast<std::size_t>(i), g.integer(0, 3) != 0);
    }
    if (v.count() == 0) v.set(0, true);
    const double iou = miou(a, b, v), pe = pct_error(a, b, v);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
    CHECK(pe >= 0.0);
    CHECK(pe <= 100.0);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());
    Mask pa(1, n), pb(1, n), pv(1, n);
    for (int i = 0; i < n; ++i) {
      const std::size_t j = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
      pa.set(static_cast<std::size_t>(i), a[j]);
      pb.set(static_cast<std::size_t>(i), b[j]);
      pv.set(static_cast<std::size_t>(i), v[j]);
    }
    CHECK(miou(pa, pb, pv) == iou);
    CHECK(pct_error(pa, pb, pv) == pe);
    Mask flipped = a;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) if (!v[i]) flipped.set(i, !a[i]);
    CHECK(miou(flipped, b, v) == iou);
  });
}

TEST_CASE("endpoint error") {
  ImageBuffer u(2, 2, 1, 3.0), v(2, 2, 1, 4.0), z(2, 2);
  Mask valid(2, 2, true);
  CHECK(endpoint_error(u, v, z, z, valid) == doctest::Approx(5.0));
  valid.set(0, false);
  u(0, 0) = 100.0;
  CHECK(endpoint_error(u, v, z, z, valid) == doctest::Approx(5.0));
  CHECK_THROWS_AS(endpoint_error(u, v, z, z, Mask(2, 2)), DomainError);
}

TEST_CASE("quantized bin centres") {
  QuantizedTtcMap q;
  q.height = 1;
  q.width = 4;
  q.edges = {0.6, 0.8, 1.0};
  q.bins = {0, 1, 2, 3};
  const ImageBuffer e = quantized_eta(q);
  CHECK(e(0, 0) == doctest::Approx(0.5));
  CHECK(e(0, 1) == doctest::Approx(0.7));
  CHECK(e(0, 2) == doctest::Approx(0.9));
  CHECK(e(0, 3) == doctest::Approx(1.1));
}

TEST_CASE("the hard oracle scores perfectly") {
  const sim::Dataset d = sim::generate_dataset(6, sim::GeneratorConfig{}, 2);
  EvalConfig cfg = EvalConfig::standard(d.interval);
  const EvalReport r = evaluate(oracle_predictors(0.0), d, cfg, "oracle", "unit");
  REQUIRE(r.per_alpha.size() == 8);
  double mean = 0;
  for (const auto& m : r.per_alpha) {
    CHECK(m.miou == 1.0);
    CHECK(m.pooled_iou == 1.0);
    CHECK(m.pct_error == 0.0);
    mean += m.miou;
  }
  CHECK(r.miou == mean / 8);
  CHECK(r.pct_error == 0.0);
  CHECK(r.monotonicity_violation_rate == 0.0);
  CHECK(r.negative_bin_rate == 0.0);
  // Hard AUC error is at most half a step: |log| error below (step / 2) / 0.5.
  CHECK(r.mid <= 1e4 * std::log(1.0 + 0.5 * cfg.continuous.uniform_step() / 0.5));
  CHECK(r.has_flow);
  CHECK(r.flow_step == doctest::Approx(3.2));
  CHECK(r.timings.size() == 4);
  CHECK(r.to_text().find("mIOU            1.0000") != std::string::npos);
}

TEST_CASE("soft oracle motion-in-depth error") {
  const sim::Dataset d = sim::generate_dataset(10, sim::GeneratorConfig{}, 3);
  EvalConfig cfg = EvalConfig::standard(d.interval);
  cfg.with_flow = false;
  const EvalReport r = evaluate(oracle_predictors(0.02), d, cfg);
  CHECK(r.mid <= 150.0);
  CHECK_FALSE(r.has_flow);
}

TEST_CASE("evaluation is deterministic across worker counts") {
  const sim::Dataset d = sim::generate_dataset(4, sim::GeneratorConfig{}, 4);
  EvalConfig cfg = EvalConfig::standard(d.interval);
  const EvalReport a = evaluate(oracle_predictors(0.05), d, cfg);
  cfg.parallelism = 3;
  const EvalReport b = evaluate(oracle_predictors(0.05), d, cfg);
  CHECK(metrics_csv(a) == metrics_csv(b));
  CHECK(a.mid == b.mid);
  CHECK(a.epe == b.epe);
}

TEST_CASE("missing ground-truth channels are listed") {
  sim::Dataset d = sim::generate_dataset(2, sim::GeneratorConfig{}, 5);
  d.samples[1].gt.flow_u = ImageBuffer();
  d.samples[1].gt.eta = ImageBuffer();
  try {
    evaluate(oracle_predictors(0.0), d, EvalConfig::standard(d.interval));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("eta") != std::string::npos);
    CHECK(what.find("flow_u") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate(oracle_predictors(0.0), sim::Dataset{}, EvalConfig::standard(0.1)), ConfigError);
}

TEST_CASE("external motion-in-depth maps are ingested bit exactly") {
  testing::ScratchDir dir("ingest");
  testing::Gen g(102);
  ImageBuffer eta = testing::random_image(g, 8, 16, 1, 0.5, 1.3);
  for (double& v : eta.values()) v = static_cast<float>(v);
  io::write_pfm(dir / "eta.pfm", eta);
  CHECK(ingest_pfm(dir / "eta.pfm") == eta);
  CHECK_THROWS_AS(ingest_pfm(dir / "eta.pfm", 3), FormatError);
}

TEST_CASE("bench rows and feature-extraction counts") {
  nn::CompactNet net(nn::NetConfig::toy());
  net.initialize(1);
  testing::Gen g(103);
  const ImageBuffer i0 = testing::random_image(g, 16, 32, 3, 0, 1), i1 = testing::random_image(g, 16, 32, 3, 0, 1);
  BenchConfig cfg;
  cfg.repeats = 2;
  const auto rows = bench(net, i0, i1, cfg);
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    CHECK(r.feature_calls_per_pair == 2.0);
    CHECK(r.median_ms >= r.sweep_median_ms * 0.0);
    CHECK(r.repeats == 2);
  }
  CHECK(rows[0].sweep_size == 1);
  CHECK(rows[8].sweep_size == 24);
  CHECK(rows[8].parallelism == 4);
  const std::string csv = bench_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  cfg.sweep_sizes = {0};
  CHECK_THROWS_AS(bench(net, i0, i1, cfg), ConfigError);
}

}  // TEST_SUITE
