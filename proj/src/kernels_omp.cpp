#include <Eigen/Core>
#include <omp.h>

#include <algorithm>
#include <vector>

#include "kernels_detail.hpp"
#include "ttc/kernels.hpp"

namespace ttc::kernels {

namespace {

using detail::Taps;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// Fixed column-block width for the GEMMs. Keeping it independent of the
// thread count keeps every block product, and so every output bit, the same.
constexpr int kColumnBlock = 512;

std::vector<Taps> axis_taps(AxisMap map, int count, int n, Boundary boundary) {
  std::vector<Taps> taps(count);
  for (int i = 0; i < count; ++i) taps[i] = detail::make_taps(map(i), n, boundary);
  return taps;
}

// cols is (C*k*k) x (ho*wo), row-major.
void im2col(const ImageBuffer& in, const ConvShape& s, int ho, int wo, std::vector<double>& cols) {
  const int k = s.kernel;
  const int rows = s.in_channels * k * k;
  const std::size_t n = static_cast<std::size_t>(ho) * wo;
  cols.assign(static_cast<std::size_t>(rows) * n, 0.0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int ic = r / (k * k);
    const int ky = (r / k) % k;
    const int kx = r % k;
    double* dst = cols.data() + static_cast<std::size_t>(r) * n;
    for (int oy = 0; oy < ho; ++oy) {
      const int iy = oy * s.stride - s.pad + ky;
      if (iy < 0 || iy >= in.height()) continue;
      const double* src = in.data() + (static_cast<std::size_t>(ic) * in.height() + iy) * in.width();
      double* row = dst + static_cast<std::size_t>(oy) * wo;
      for (int ox = 0; ox < wo; ++ox) {
        const int ix = ox * s.stride - s.pad + kx;
        if (ix >= 0 && ix < in.width()) row[ox] = src[ix];
      }
    }
  }
}

void col2im(const std::vector<double>& cols, const ConvShape& s, int ho, int wo, ImageBuffer& din) {
  const int k = s.kernel;
  const std::size_t n = static_cast<std::size_t>(ho) * wo;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < s.in_channels; ++ic) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const int r = (ic * k + ky) * k + kx;
        const double* src = cols.data() + static_cast<std::size_t>(r) * n;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * s.stride - s.pad + ky;
          if (iy < 0 || iy >= din.height()) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * s.stride - s.pad + kx;
            if (ix >= 0 && ix < din.width()) din.at(ic, iy, ix) += src[static_cast<std::size_t>(oy) * wo + ox];
          }
        }
      }
    }
  }
}

int block_count(std::size_t n) { return static_cast<int>((n + kColumnBlock - 1) / kColumnBlock); }

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void affine_warp(const ImageBuffer& in, ImageBuffer& out, AxisMap ymap, AxisMap xmap,
                 Boundary boundary) {
  detail::check_warp_shapes(in, out);
  const auto ty = axis_taps(ymap, out.height(), in.height(), boundary);
  const auto tx = axis_taps(xmap, out.width(), in.width(), boundary);
  const int rows = out.channels() * out.height();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int c = r / out.height();
    const int y = r % out.height();
    const Taps& t = ty[y];
    const double* row0 = t.i0 >= 0 ? in.data() + (static_cast<std::size_t>(c) * in.height() + t.i0) * in.width() : nullptr;
    const double* row1 = t.i1 >= 0 ? in.data() + (static_cast<std::size_t>(c) * in.height() + t.i1) * in.width() : nullptr;
    double* dst = &out.at(c, y, 0);
    for (int x = 0; x < out.width(); ++x) {
      const Taps& s = tx[x];
      auto sample = [&](const double* row, int ix) { return (row && ix >= 0) ? row[ix] : 0.0; };
      const double top = s.w0 * sample(row0, s.i0) + s.w1 * sample(row0, s.i1);
      const double bottom = s.w0 * sample(row1, s.i0) + s.w1 * sample(row1, s.i1);
      dst[x] = t.w0 * top + t.w1 * bottom;
    }
  }
}

void affine_warp_adjoint(const ImageBuffer& dout, ImageBuffer& din, AxisMap ymap, AxisMap xmap,
                         Boundary boundary) {
  detail::check_warp_shapes(din, dout);
  const auto ty = axis_taps(ymap, dout.height(), din.height(), boundary);
  const auto tx = axis_taps(xmap, dout.width(), din.width(), boundary);
  // Channels are independent; within a channel the scatter order matches the
  // serial reference.
#pragma omp parallel for schedule(static)
  for (int c = 0; c < dout.channels(); ++c) {
    for (int y = 0; y < dout.height(); ++y) {
      const Taps& t = ty[y];
      for (int x = 0; x < dout.width(); ++x) {
        const Taps& s = tx[x];
        const double g = dout.at(c, y, x);
        auto scatter = [&](int iy, int ix, double weight) {
          if (iy >= 0 && ix >= 0) din.at(c, iy, ix) += weight * g;
        };
        scatter(t.i0, s.i0, t.w0 * s.w0);
        scatter(t.i0, s.i1, t.w0 * s.w1);
        scatter(t.i1, s.i0, t.w1 * s.w0);
        scatter(t.i1, s.i1, t.w1 * s.w1);
      }
    }
  }
}

void conv2d_forward(const ImageBuffer& in, std::span<const double> weight,
                    std::span<const double> bias, const ConvShape& s, ImageBuffer& out) {
  detail::check_conv_shapes(in, weight, s);
  const int ho = s.out_extent(in.height());
  const int wo = s.out_extent(in.width());
  const int kdim = s.in_channels * s.kernel * s.kernel;
  const std::size_t n = static_cast<std::size_t>(ho) * wo;
  std::vector<double> cols;
  im2col(in, s, ho, wo, cols);
  out = ImageBuffer(ho, wo, s.out_channels);
  const ConstRowMap w(weight.data(), s.out_channels, kdim);
  const ConstRowMap c(cols.data(), kdim, static_cast<Eigen::Index>(n));
  RowMap o(out.data(), s.out_channels, static_cast<Eigen::Index>(n));
  const int blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const Eigen::Index j0 = static_cast<Eigen::Index>(b) * kColumnBlock;
    const Eigen::Index nb = std::min<Eigen::Index>(kColumnBlock, static_cast<Eigen::Index>(n) - j0);
    o.middleCols(j0, nb).noalias() = w * c.middleCols(j0, nb);
    if (!bias.empty()) {
      for (int oc = 0; oc < s.out_channels; ++oc) o.row(oc).segment(j0, nb).array() += bias[oc];
    }
  }
}

void conv2d_backward(const ImageBuffer& in, std::span<const double> weight, const ConvShape& s,
                     const ImageBuffer& dout, ImageBuffer* din, std::span<double> dweight,
                     std::span<double> dbias) {
  detail::check_conv_shapes(in, weight, s);
  const int ho = dout.height();
  const int wo = dout.width();
  const int kdim = s.in_channels * s.kernel * s.kernel;
  const std::size_t n = static_cast<std::size_t>(ho) * wo;
  std::vector<double> cols;
  im2col(in, s, ho, wo, cols);
  const ConstRowMap w(weight.data(), s.out_channels, kdim);
  const ConstRowMap c(cols.data(), kdim, static_cast<Eigen::Index>(n));
  const ConstRowMap g(dout.data(), s.out_channels, static_cast<Eigen::Index>(n));
  const int blocks = block_count(n);

  // Weight gradient: per-block partial products reduced in block order.
  std::vector<RowMatrix> partial(blocks);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const Eigen::Index j0 = static_cast<Eigen::Index>(b) * kColumnBlock;
    const Eigen::Index nb = std::min<Eigen::Index>(kColumnBlock, static_cast<Eigen::Index>(n) - j0);
    partial[b].noalias() = g.middleCols(j0, nb) * c.middleCols(j0, nb).transpose();
  }
  RowMap dw(dweight.data(), s.out_channels, kdim);
  for (int b = 0; b < blocks; ++b) dw += partial[b];
  if (!dbias.empty()) {
    for (int oc = 0; oc < s.out_channels; ++oc) {
      const double* row = dout.data() + static_cast<std::size_t>(oc) * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += row[j];
      dbias[oc] += acc;
    }
  }

  if (din) {
    std::vector<double> dcols(static_cast<std::size_t>(kdim) * n);
    RowMap dc(dcols.data(), kdim, static_cast<Eigen::Index>(n));
#pragma omp parallel for schedule(static)
    for (int b = 0; b < blocks; ++b) {
      const Eigen::Index j0 = static_cast<Eigen::Index>(b) * kColumnBlock;
      const Eigen::Index nb = std::min<Eigen::Index>(kColumnBlock, static_cast<Eigen::Index>(n) - j0);
      dc.middleCols(j0, nb).noalias() = w.transpose() * g.middleCols(j0, nb);
    }
    *din = ImageBuffer(in.height(), in.width(), in.channels());
    col2im(dcols, s, ho, wo, *din);
  }
}

}  // namespace ttc::kernels
