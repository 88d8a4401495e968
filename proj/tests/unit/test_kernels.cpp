#include <doctest.h>

#include <omp.h>

#include "support/testing.hpp"
#include "ttc/kernels.hpp"

using namespace ttc;
using namespace ttc::kernels;

namespace {

// Direct convolution straight from the definition.
ImageBuffer naive_conv(const ImageBuffer& in, const std::vector<double>& w, const std::vector<double>& b,
                       const ConvShape& s) {
  const int ho = s.out_extent(in.height()), wo = s.out_extent(in.width());
  ImageBuffer out(ho, wo, s.out_channels);
  for (int o = 0; o < s.out_channels; ++o) {
    for (int y = 0; y < ho; ++y) {
      for (int x = 0; x < wo; ++x) {
        double acc = b.empty() ? 0.0 : b[o];
        for (int i = 0; i < s.in_channels; ++i) {
          for (int ky = 0; ky < s.kernel; ++ky) {
            for (int kx = 0; kx < s.kernel; ++kx) {
              const int iy = y * s.stride - s.pad + ky, ix = x * s.stride - s.pad + kx;
              if (iy < 0 || ix < 0 || iy >= in.height() || ix >= in.width()) continue;
              acc += w[((o * s.in_channels + i) * s.kernel + ky) * s.kernel + kx] * in.at(i, iy, ix);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

std::vector<double> random_vec(testing::Gen& g, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = g.uniform(-1, 1);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_close(const ImageBuffer& a, const ImageBuffer& b, double tol) {
  REQUIRE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= tol);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("convolution matches the direct definition, serial and parallel") {
  testing::for_all(12, 21, [](testing::Gen& g) {
    ConvShape s{g.integer(1, 4), g.integer(1, 5), 3, g.integer(1, 2), 1};
    const ImageBuffer in = testing::random_image(g, g.integer(1, 40), g.integer(1, 40), s.in_channels);
    const auto w = random_vec(g, static_cast<std::size_t>(s.weight_count()));
    const auto b = random_vec(g, static_cast<std::size_t>(s.out_channels));
    const ImageBuffer ref = naive_conv(in, w, b, s);
    ImageBuffer par, ser;
    conv2d_forward(in, w, b, s, par);
    serial::conv2d_forward(in, w, b, s, ser);
    check_close(par, ref, 1e-12);
    check_close(ser, ref, 1e-12);
  });
}

TEST_CASE("convolution backward is the transpose of forward") {
  testing::for_all(12, 22, [](testing::Gen& g) {
    ConvShape s{g.integer(1, 4), g.integer(1, 4), 3, g.integer(1, 2), 1};
    const ImageBuffer in = testing::random_image(g, g.integer(2, 30), g.integer(2, 30), s.in_channels);
    const auto w = random_vec(g, static_cast<std::size_t>(s.weight_count()));
    ImageBuffer out;
    conv2d_forward(in, w, {}, s, out);
    const ImageBuffer gout = testing::random_image(g, out.height(), out.width(), out.channels());
    for (int impl = 0; impl < 2; ++impl) {
      ImageBuffer din;
      std::vector<double> dw(w.size(), 0.0), db(static_cast<std::size_t>(s.out_channels), 0.0);
      if (impl == 0) conv2d_backward(in, w, s, gout, &din, dw, db);
      else serial::conv2d_backward(in, w, s, gout, &din, dw, db);
      // <conv(x; w), g> is bilinear in (x, w): both partial adjoints must agree.
      const double lhs = dot(out.values(), gout.values());
      CHECK(dot(in.values(), din.values()) == doctest::Approx(lhs).epsilon(1e-11));
      CHECK(dot(w, dw) == doctest::Approx(lhs).epsilon(1e-11));
      double gsum = 0;
      for (int o = 0; o < s.out_channels; ++o) {
        double acc = 0;
        for (double v : gout.plane(o)) acc += v;
        CHECK(db[static_cast<std::size_t>(o)] == doctest::Approx(acc).epsilon(1e-12));
        gsum += acc;
      }
      (void)gsum;
    }
  });
}

TEST_CASE("affine warp parallel equals serial bit for bit") {
  testing::Gen g(23);
  const ImageBuffer in = testing::random_image(g, 33, 47, 3);
  for (Boundary b : {Boundary::zero, Boundary::clamp}) {
    ImageBuffer a(29, 51, 3), s(29, 51, 3);
    const AxisMap ym{0.9, 1.3}, xm{1.1, -2.2};
    affine_warp(in, a, ym, xm, b);
    serial::affine_warp(in, s, ym, xm, b);
    CHECK(a == s);
    const ImageBuffer gy = testing::random_image(g, 29, 51, 3);
    ImageBuffer da(33, 47, 3), ds(33, 47, 3);
    affine_warp_adjoint(gy, da, ym, xm, b);
    serial::affine_warp_adjoint(gy, ds, ym, xm, b);
    CHECK(da == ds);
  }
}

TEST_CASE("parallel kernels give identical bits for any thread count") {
  testing::Gen g(24);
  ConvShape s{16, 32, 3, 2, 1};
  const ImageBuffer in = testing::random_image(g, 48, 96, s.in_channels);
  const auto w = random_vec(g, static_cast<std::size_t>(s.weight_count()));
  const auto b = random_vec(g, static_cast<std::size_t>(s.out_channels));
  ImageBuffer ref;
  omp_set_num_threads(1);
  conv2d_forward(in, w, b, s, ref);
  ImageBuffer gout = testing::random_image(g, ref.height(), ref.width(), ref.channels());
  ImageBuffer din_ref;
  std::vector<double> dw_ref(w.size(), 0.0), db_ref(b.size(), 0.0);
  conv2d_backward(in, w, s, gout, &din_ref, dw_ref, db_ref);
  for (int threads : {2, 3, 8}) {
    omp_set_num_threads(threads);
    ImageBuffer out, din;
    std::vector<double> dw(w.size(), 0.0), db(b.size(), 0.0);
    conv2d_forward(in, w, b, s, out);
    conv2d_backward(in, w, s, gout, &din, dw, db);
    CHECK(out == ref);
    CHECK(din == din_ref);
    CHECK(dw == dw_ref);
    CHECK(db == db_ref);
  }
  omp_set_num_threads(max_threads());
}

TEST_CASE("kernels reject inconsistent shapes") {
  ImageBuffer out;
  std::vector<double> w(27, 0.0);
  CHECK_THROWS_AS(conv2d_forward(ImageBuffer(4, 4, 2), w, {}, ConvShape{1, 3, 3, 1, 1}, out), ShapeError);
  ImageBuffer a(3, 3, 2), b(3, 3, 1);
  CHECK_THROWS_AS(affine_warp(a, b, {}, {}, Boundary::zero), ShapeError);
}

}  // TEST_SUITE
