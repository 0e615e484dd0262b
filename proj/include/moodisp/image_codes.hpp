#pragma once

#include <cstdint>

#include "moodisp/core.hpp"

namespace moodisp {

/// Integer-coded RGB raster as stored on disk.  The code type fixes the
/// colorspace: 8-bit codes are sRGB-encoded, 16-bit codes are linear.
template <typename Code>
struct CodeImage {
  Plane<Code> r, g, b;

  CodeImage() = default;
  CodeImage(Eigen::Index width, Eigen::Index height)
      : r(Plane<Code>::Zero(height, width)),
        g(Plane<Code>::Zero(height, width)),
        b(Plane<Code>::Zero(height, width)) {}

  Eigen::Index width() const { return r.cols(); }
  Eigen::Index height() const { return r.rows(); }
  bool empty() const { return r.size() == 0; }
  Plane<Code>& channel(int c) { return c == 0 ? r : (c == 1 ? g : b); }
  const Plane<Code>& channel(int c) const { return c == 0 ? r : (c == 1 ? g : b); }

  friend bool operator==(const CodeImage& a, const CodeImage& b) {
    return a.r.rows() == b.r.rows() && a.r.cols() == b.r.cols() && (a.r == b.r).all() &&
           (a.g == b.g).all() && (a.b == b.b).all();
  }
};

using Srgb8Image = CodeImage<std::uint8_t>;
using Linear16Image = CodeImage<std::uint16_t>;

/// round(sample * 65535) per channel.
template <typename Scalar>
Linear16Image quantize_linear16(const LinearImage<Scalar>& img) {
  Linear16Image out;
  for (int c = 0; c < 3; ++c)
    out.channel(c) = (img.channel(c).template cast<double>().max(0.0).min(1.0) * 65535.0 + 0.5)
                         .floor()
                         .template cast<std::uint16_t>();
  return out;
}

/// sample / 65535 per channel.
template <typename Scalar = double>
LinearImage<Scalar> dequantize_linear16(const Linear16Image& img) {
  LinearImage<Scalar> out;
  for (int c = 0; c < 3; ++c)
    out.channel(c) = img.channel(c).template cast<Scalar>() / Scalar(65535);
  return out;
}

}  // namespace moodisp
