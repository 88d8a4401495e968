#include <cmath>

#include "kernels_detail.hpp"
#include "ttc/kernels.hpp"

namespace ttc::kernels::serial {

using detail::Taps;
using detail::make_taps;

void affine_warp(const ImageBuffer& in, ImageBuffer& out, AxisMap ymap, AxisMap xmap,
                 Boundary boundary) {
  detail::check_warp_shapes(in, out);
  const int h = in.height();
  const int w = in.width();
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      const Taps ty = make_taps(ymap(y), h, boundary);
      for (int x = 0; x < out.width(); ++x) {
        const Taps tx = make_taps(xmap(x), w, boundary);
        auto sample = [&](int iy, int ix) {
          return (iy < 0 || ix < 0) ? 0.0 : in.at(c, iy, ix);
        };
        const double top = tx.w0 * sample(ty.i0, tx.i0) + tx.w1 * sample(ty.i0, tx.i1);
        const double bottom = tx.w0 * sample(ty.i1, tx.i0) + tx.w1 * sample(ty.i1, tx.i1);
        out.at(c, y, x) = ty.w0 * top + ty.w1 * bottom;
      }
    }
  }
}

void affine_warp_adjoint(const ImageBuffer& dout, ImageBuffer& din, AxisMap ymap, AxisMap xmap,
                         Boundary boundary) {
  detail::check_warp_shapes(din, dout);
  const int h = din.height();
  const int w = din.width();
  for (int c = 0; c < dout.channels(); ++c) {
    for (int y = 0; y < dout.height(); ++y) {
      const Taps ty = make_taps(ymap(y), h, boundary);
      for (int x = 0; x < dout.width(); ++x) {
        const Taps tx = make_taps(xmap(x), w, boundary);
        const double g = dout.at(c, y, x);
        auto scatter = [&](int iy, int ix, double weight) {
          if (iy >= 0 && ix >= 0) din.at(c, iy, ix) += weight * g;
        };
        scatter(ty.i0, tx.i0, ty.w0 * tx.w0);
        scatter(ty.i0, tx.i1, ty.w0 * tx.w1);
        scatter(ty.i1, tx.i0, ty.w1 * tx.w0);
        scatter(ty.i1, tx.i1, ty.w1 * tx.w1);
      }
    }
  }
}

void conv2d_forward(const ImageBuffer& in, std::span<const double> weight,
                    std::span<const double> bias, const ConvShape& s, ImageBuffer& out) {
  detail::check_conv_shapes(in, weight, s);
  const int ho = s.out_extent(in.height());
  const int wo = s.out_extent(in.width());
  out = ImageBuffer(ho, wo, s.out_channels);
  const int k = s.kernel;
  for (int oc = 0; oc < s.out_channels; ++oc) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        double acc = bias.empty() ? 0.0 : bias[oc];
        for (int ic = 0; ic < s.in_channels; ++ic) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride - s.pad + ky;
            if (iy < 0 || iy >= in.height()) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride - s.pad + kx;
              if (ix < 0 || ix >= in.width()) continue;
              acc += weight[((oc * s.in_channels + ic) * k + ky) * k + kx] * in.at(ic, iy, ix);
            }
          }
        }
        out.at(oc, oy, ox) = acc;
      }
    }
  }
}

void conv2d_backward(const ImageBuffer& in, std::span<const double> weight, const ConvShape& s,
                     const ImageBuffer& dout, ImageBuffer* din, std::span<double> dweight,
                     std::span<double> dbias) {
  detail::check_conv_shapes(in, weight, s);
  if (din) *din = ImageBuffer(in.height(), in.width(), in.channels());
  const int k = s.kernel;
  for (int oc = 0; oc < s.out_channels; ++oc) {
    for (int oy = 0; oy < dout.height(); ++oy) {
      for (int ox = 0; ox < dout.width(); ++ox) {
        const double g = dout.at(oc, oy, ox);
        if (!dbias.empty()) dbias[oc] += g;
        for (int ic = 0; ic < s.in_channels; ++ic) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * s.stride - s.pad + ky;
            if (iy < 0 || iy >= in.height()) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int ix = ox * s.stride - s.pad + kx;
              if (ix < 0 || ix >= in.width()) continue;
              const std::size_t wi = ((oc * s.in_channels + ic) * k + ky) * k + kx;
              dweight[wi] += g * in.at(ic, iy, ix);
              if (din) din->at(ic, iy, ix) += g * weight[wi];
            }
          }
        }
      }
    }
  }
}

}  // namespace ttc::kernels::serial
