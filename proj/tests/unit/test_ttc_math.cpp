#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support/testing.hpp"
#include "ttc/image.hpp"
#include "ttc/ttc_math.hpp"

using namespace ttc;
using doctest::Approx;

namespace {

const FrameInterval kT{0.1};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("ttc_math") {

TEST_CASE("depth and velocity") {
  CHECK(ttc_from_depth_velocity(10, -20).value() == Approx(0.5));
  CHECK(ttc_from_depth_velocity(10, 0).is_never());
  CHECK(ttc_from_depth_velocity(5, 5).value() == Approx(-1.0));
  CHECK_THROWS_AS(ttc_from_depth_velocity(0, -1), DomainError);
  CHECK_THROWS_AS(ttc_from_depth_velocity(-3, -1), DomainError);
}

TEST_CASE("depth ratio") {
  CHECK(ttc_from_depth_ratio(10, 8, kT).value() == Approx(0.5));
  CHECK(ttc_from_depth_ratio(10, 10, kT).is_never());
  CHECK(ttc_from_depth_ratio(8, 10, kT).value() == Approx(-0.4));
  CHECK_THROWS_AS(ttc_from_depth_ratio(0, 8, kT), DomainError);
  CHECK_THROWS_AS(ttc_from_depth_ratio(10, -1, kT), DomainError);
}

TEST_CASE("scale factor") {
  CHECK(ttc_from_scale(0.8, kT).value() == Approx(0.5));
  CHECK(ttc_from_scale(1.0, kT).is_never());
  CHECK_THROWS_AS(ttc_from_scale(0.0, kT), DomainError);
  CHECK_THROWS_AS(ttc_from_scale(-0.5, kT), DomainError);
  for (double a : {0.5, 0.9, 1.3}) CHECK(alpha_from_ttc(ttc_from_scale(a, kT), kT) == Approx(a).epsilon(1e-14));
  CHECK(alpha_from_ttc(Ttc::never(), kT) == 1.0);
}

TEST_CASE("frame interval and eta validate their domain") {
  CHECK_THROWS_AS(FrameInterval(0.0), DomainError);
  CHECK_THROWS_AS(FrameInterval(-0.1), DomainError);
  CHECK_THROWS_AS(Eta(0.0), DomainError);
  CHECK(Eta(0.9).approaching());
  CHECK(Eta(1.1).receding());
}

TEST_CASE("eta and ttc") {
  CHECK(eta_from_ttc(Ttc::seconds(0.5), kT).value() == Approx(0.8));
  CHECK(eta_from_ttc(Ttc::seconds(-0.4), kT).value() == Approx(1.25));
  CHECK(ttc_from_eta(Eta(1.0), FrameInterval(0.37)).is_never());
  CHECK(eta_from_ttc(Ttc::never(), kT).value() == 1.0);
  CHECK_THROWS_AS(eta_from_ttc(Ttc::seconds(0.0), kT), DomainError);
  // tau in (0, T] would need a non-positive depth ratio.
  CHECK_THROWS_AS(eta_from_ttc(Ttc::seconds(0.05), kT), DomainError);
  CHECK_THROWS_AS(Ttc::never().value(), DomainError);
}

TEST_CASE("image size") {
  CHECK(image_size_from_depth(100, 2, 10) == Approx(20));
  CHECK(image_size_from_depth(100, 2, 20) == Approx(10));
  CHECK_THROWS_AS(image_size_from_depth(0, 2, 10), DomainError);
  CHECK_THROWS_AS(image_size_from_depth(100, -2, 10), DomainError);
  CHECK_THROWS_AS(image_size_from_depth(100, 2, 0), DomainError);
  CHECK(ttc_from_size_rate(20, 40).value() == Approx(0.5));
  CHECK(ttc_from_size_rate(20, 0).is_never());
  CHECK_THROWS_AS(ttc_from_size_rate(0, 1), DomainError);
}

TEST_CASE("size-rate TTC agrees with depth-velocity TTC") {
  // s = f S / Z  =>  ds/dt = -f S Zdot / Z^2  and  s / sdot = -Z / Zdot.
  testing::for_all(200, 11, [](testing::Gen& g) {
    const double f = g.uniform(50, 500), S = g.uniform(0.2, 3), Z = g.uniform(1, 50);
    const double zdot = g.signed_log(0.1, 30);
    const double s = image_size_from_depth(f, S, Z);
    const double sdot = -f * S * zdot / (Z * Z);
    CHECK(rel(ttc_from_size_rate(s, sdot).value(), ttc_from_depth_velocity(Z, zdot).value()) < 1e-12);
  });
}

TEST_CASE("size ratio equals inverse eta independent of focal length and size") {
  testing::for_all(200, 12, [](testing::Gen& g) {
    const double z0 = g.uniform(1, 50), eta = g.uniform(0.3, 2.0);
    const double f = g.uniform(10, 1000), S = g.uniform(0.01, 10);
    const double ratio = image_size_from_depth(f, S, eta * z0) / image_size_from_depth(f, S, z0);
    CHECK(rel(ratio, 1.0 / eta) < 1e-12);
  });
}

TEST_CASE("focus of expansion") {
  const Foe a = foe_of_motion(0, 0, -5, 100);
  CHECK(a.x0 == Approx(0));
  CHECK(a.y0 == Approx(0));
  CHECK_THROWS_AS(foe_of_motion(1, 0, 0, 100), IndeterminateError);
}

TEST_CASE("focus of expansion matches intersecting projected flow lines") {
  // Project two scene points at t0 and t1 and intersect their flow lines.
  struct Case {
    double vx, vy, vz;
  };
  for (const Case c : {Case{1, 0, -5}, Case{0, 2, -4}, Case{0.7, -1.3, 3}}) {
    auto project = [&](double X, double Y, double Z, double t) {
      const double z = Z + c.vz * t;
      return std::pair{100.0 * (X + c.vx * t) / z, 100.0 * (Y + c.vy * t) / z};
    };
    auto line = [&](double X, double Y, double Z) {
      const auto p0 = project(X, Y, Z, 0.0);
      const auto p1 = project(X, Y, Z, 0.1);
      return std::pair{p0, std::pair{p1.first - p0.first, p1.second - p0.second}};
    };
    const auto [pa, da] = line(0.5, 0.3, 10);
    const auto [pb, db] = line(-1.2, 0.8, 12);
    // pa + s da = pb + r db
    const double det = da.first * (-db.second) - da.second * (-db.first);
    const double s = ((pb.first - pa.first) * (-db.second) - (pb.second - pa.second) * (-db.first)) / det;
    const Foe expected{pa.first + s * da.first, pa.second + s * da.second};
    const Foe got = foe_of_motion(c.vx, c.vy, c.vz, 100);
    CHECK(got.x0 == Approx(expected.x0).epsilon(1e-9));
    CHECK(got.y0 == Approx(expected.y0).epsilon(1e-9));
  }
  CHECK(foe_of_motion(1, 0, -5, 100).x0 == Approx(-20));
  CHECK(foe_of_motion(0, 2, -4, 100).y0 == Approx(-50));
}

TEST_CASE("flow TTC") {
  CHECK(ttc_from_flow(10, 0, {0, 0}, 2, 0, kT).value() == Approx(0.5));
  CHECK(ttc_from_flow(0, 6, {0, 0}, 0, 3, kT).value() == Approx(0.2));
  CHECK(ttc_from_flow(13, 4, {3, 4}, 2, 0, kT).value() == Approx(0.5));
  CHECK_THROWS_AS(ttc_from_flow(5, 5, {5, 5}, 0, 0, kT), IndeterminateError);
  // Both branches agree for a consistent flow vector, whatever the weights.
  CHECK(ttc_from_flow(10, 20, {0, 0}, 2, 4, kT).value() == Approx(0.5));
  // Disagreeing branches are weighted by |u| and |v|.
  CHECK(ttc_from_flow(10, 10, {0, 0}, 1, 3, kT).value() == Approx((1 * 1.0 + 3 * (1.0 / 3.0)) / 4));
}

TEST_CASE("flow TTC of a translating point equals the exact TTC") {
  testing::for_all(300, 13, [](testing::Gen& g) {
    const double f = 100, z0 = g.uniform(4, 12);
    const double eta = g.uniform(0.5, 1.3);
    if (std::abs(eta - 1.0) < 1e-3) return;
    const double vz = (eta - 1.0) * z0 / 0.1;
    const double vx = g.uniform(-5, 5), vy = g.uniform(-2, 2);
    const double X = g.uniform(-3, 3), Y = g.uniform(-2, 2);
    const double x0 = f * X / z0, y0 = f * Y / z0;
    const double z1 = z0 + vz * 0.1;
    const double x1 = f * (X + vx * 0.1) / z1, y1 = f * (Y + vy * 0.1) / z1;
    const Foe foe = foe_of_motion(vx, vy, vz, f);
    if (std::abs(x1 - x0) < 1e-6 && std::abs(y1 - y0) < 1e-6) return;
    const Ttc tau = ttc_from_flow(x1, y1, foe, x1 - x0, y1 - y0, kT);
    CHECK(rel(tau.value(), -z0 / vz) < 1e-9);
  });
}

TEST_CASE("round trips hold to 1e-12 relative") {
  // tau -> eta -> tau cancels in 1 - eta, losing log10(|tau| / T) digits, so
  // that direction is sampled with |tau| / T up to 1e3.
  testing::for_all(10000, 14, [](testing::Gen& g) {
    const FrameInterval T(g.uniform(0.01, 0.5));
    const double ratio = g.signed_log(1.0001, 1e3);
    const double tau = ratio * T.seconds();
    const Ttc back = ttc_from_eta(eta_from_ttc(Ttc::seconds(tau), T), T);
    CHECK(rel(back.value(), tau) < 1e-12);
  });
  testing::for_all(10000, 16, [](testing::Gen& g) {
    const FrameInterval T(g.uniform(0.01, 0.5));
    const double eta = g.uniform(0.05, 3.0);
    if (eta == 1.0) return;
    const Eta back = eta_from_ttc(ttc_from_eta(Eta(eta), T), T);
    CHECK(rel(back.value(), eta) < 1e-12);
  });
}

TEST_CASE("depth-ratio TTC equals scale TTC under alpha = Z1/Z0") {
  testing::for_all(10000, 15, [](testing::Gen& g) {
    const FrameInterval T(g.uniform(0.01, 0.5));
    const double z0 = g.uniform(0.5, 100), z1 = g.uniform(0.5, 100);
    const Ttc a = ttc_from_depth_ratio(z0, z1, T);
    const Ttc b = ttc_from_scale(z1 / z0, T);
    REQUIRE(a.is_never() == b.is_never());
    if (!a.is_never()) CHECK(a.value() == b.value());
  });
}

TEST_CASE("eta is increasing in positive tau and the geofence predicates coincide") {
  testing::for_all(2000, 16, [](testing::Gen& g) {
    const FrameInterval T(0.1);
    const double a = g.uniform(0.1001, 100), b = g.uniform(0.1001, 100);
    if (a == b) return;
    const double ea = eta_from_ttc(Ttc::seconds(a), T).value();
    const double eb = eta_from_ttc(Ttc::seconds(b), T).value();
    CHECK((a < b) == (ea < eb));
    const double neg = -g.uniform(1e-3, 100);
    CHECK(eta_from_ttc(Ttc::seconds(neg), T).value() > 1.0);
    // 0 < tau <= tau_i  <=>  eta <= eta_i for a positive threshold tau_i = b.
    const double tau = g.coin() ? a : neg;
    const bool fence = tau > 0 && tau <= b;
    CHECK(fence == (eta_from_ttc(Ttc::seconds(tau), T).value() <= eb));
  });
}

TEST_CASE("mid error") {
  ImageBuffer gt(4, 5), est(4, 5);
  testing::Gen g(3);
  for (double& v : gt.values()) v = g.uniform(0.5, 1.3);
  est = gt;
  CHECK(mid_error(est, gt) == 0.0);
  for (std::size_t i = 0; i < est.size(); ++i) est.values()[i] = gt.values()[i] * std::exp(0.01);
  CHECK(mid_error(est, gt) == Approx(100.0));
  CHECK_THROWS_AS(mid_error(ImageBuffer(4, 4), gt), ShapeError);
  Mask none(4, 5);
  CHECK_THROWS_AS(mid_error(est, gt, &none), DomainError);
}

TEST_CASE("mid error matches a per-pixel reference loop and is permutation invariant") {
  testing::for_all(50, 17, [](testing::Gen& g) {
    const int h = g.integer(1, 9), w = g.integer(1, 9);
    ImageBuffer est(h, w), gt(h, w);
    Mask valid(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        est(y, x) = g.coin() ? g.uniform(0.0, 2.0) : g.uniform(-0.1, 1e-3);
        gt(y, x) = g.uniform(0.3, 1.5);
        valid.set(y, x, g.integer(0, 3) != 0);
      }
    }
    valid.set(0, 0, true);
    double sum = 0.0;
    int n = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!valid(y, x)) continue;
        const double a = est(y, x) < 1e-3 ? 1e-3 : est(y, x);
        const double b = gt(y, x) < 1e-3 ? 1e-3 : gt(y, x);
        sum += std::fabs(std::log(a) - std::log(b));
        ++n;
      }
    }
    const double mid = mid_error(est, gt, &valid);
    CHECK(mid == sum / n * 1e4);
    CHECK(mid >= 0.0);
    // Reverse the pixel order.
    ImageBuffer est_r(h, w), gt_r(h, w);
    Mask valid_r(h, w);
    const std::size_t total = est.size();
    for (std::size_t i = 0; i < total; ++i) {
      est_r.values()[total - 1 - i] = est.values()[i];
      gt_r.values()[total - 1 - i] = gt.values()[i];
      valid_r.set(total - 1 - i, valid[i]);
    }
    CHECK(mid_error(est_r, gt_r, &valid_r) == Approx(mid).epsilon(1e-12));
  });
}

}  // TEST_SUITE
