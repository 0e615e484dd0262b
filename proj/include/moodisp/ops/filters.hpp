#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "moodisp/core.hpp"

namespace moodisp {

/// Mean over the (2r+1)^2 window centered on each pixel, truncated at the
/// borders (each output is the average of the in-bounds samples).  Sums run
/// through a double-precision integral image in a fixed order.
template <typename Derived>
Plane<typename Derived::Scalar> box_mean(const Eigen::ArrayBase<Derived>& in, int radius) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index h = in.rows(), w = in.cols();
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sat =
      Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(h + 1, w + 1);
  for (Eigen::Index y = 0; y < h; ++y) {
    double row = 0.0;
    for (Eigen::Index x = 0; x < w; ++x) {
      row += static_cast<double>(in(y, x));
      sat(y + 1, x + 1) = sat(y, x + 1) + row;
    }
  }
  Plane<Scalar> out(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index y0 = std::max<Eigen::Index>(0, y - radius);
    const Eigen::Index y1 = std::min<Eigen::Index>(h, y + radius + 1);
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index x0 = std::max<Eigen::Index>(0, x - radius);
      const Eigen::Index x1 = std::min<Eigen::Index>(w, x + radius + 1);
      const double sum = sat(y1, x1) - sat(y0, x1) - sat(y1, x0) + sat(y0, x0);
      out(y, x) = static_cast<Scalar>(sum / static_cast<double>((y1 - y0) * (x1 - x0)));
    }
  }
  return out;
}

/// Normalized 1-D Gaussian taps for std-dev `sigma`, radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated borders.
template <typename Scalar>
Plane<Scalar> gaussian_blur(const Plane<Scalar>& in, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const Eigen::Index h = in.rows(), w = in.cols();
  Plane<Scalar> tmp(h, w), out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const Eigen::Index xx = std::clamp<Eigen::Index>(x + i, 0, w - 1);
        acc += k[i + radius] * static_cast<double>(in(y, xx));
      }
      tmp(y, x) = static_cast<Scalar>(acc);
    }
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const Eigen::Index yy = std::clamp<Eigen::Index>(y + i, 0, h - 1);
        acc += k[i + radius] * static_cast<double>(tmp(yy, x));
      }
      out(y, x) = static_cast<Scalar>(acc);
    }
  return out;
}

/// Window minimum and maximum over the (2r+1)^2 neighbourhood, truncated at
/// the borders.
template <typename Scalar>
void window_extrema(const Plane<Scalar>& in, int radius, Plane<Scalar>& lo, Plane<Scalar>& hi) {
  const Eigen::Index h = in.rows(), w = in.cols();
  Plane<Scalar> rlo(h, w), rhi(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const Eigen::Index x0 = std::max<Eigen::Index>(0, x - radius);
      const Eigen::Index x1 = std::min<Eigen::Index>(w - 1, x + radius);
      rlo(y, x) = in.row(y).segment(x0, x1 - x0 + 1).minCoeff();
      rhi(y, x) = in.row(y).segment(x0, x1 - x0 + 1).maxCoeff();
    }
  lo.resize(h, w);
  hi.resize(h, w);
  for (Eigen::Index y = 0; y < h; ++y) {
    const Eigen::Index y0 = std::max<Eigen::Index>(0, y - radius);
    const Eigen::Index y1 = std::min<Eigen::Index>(h - 1, y + radius);
    lo.row(y) = rlo.middleRows(y0, y1 - y0 + 1).colwise().minCoeff();
    hi.row(y) = rhi.middleRows(y0, y1 - y0 + 1).colwise().maxCoeff();
  }
}

}  // namespace moodisp
