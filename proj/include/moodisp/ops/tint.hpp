#pragma once

#include <algorithm>
#include <cmath>

#include "moodisp/core.hpp"

namespace moodisp {

/// Diagonal per-channel tint multipliers.
struct TintCoefficients {
  double m_R = 1.0, m_G = 1.0, m_B = 1.0;

  Eigen::Matrix3d matrix() const { return Eigen::Vector3d(m_R, m_G, m_B).asDiagonal(); }
  friend bool operator==(const TintCoefficients&, const TintCoefficients&) = default;
};

/// m_R = 1 + RG + YB, m_G = 1 - RG + YB, m_B = 1 - |RG| - YB, each floored at 0.
inline TintCoefficients tint_coefficients(double alpha_RG, double alpha_YB) {
  return {std::max(0.0, 1.0 + alpha_RG + alpha_YB), std::max(0.0, 1.0 - alpha_RG + alpha_YB),
          std::max(0.0, 1.0 - std::abs(alpha_RG) - alpha_YB)};
}

/// Colorfulness mask ((max - min) / (max + eps))^2 in [0, 1]; zero on the gray axis.
template <typename Scalar>
Scalar tint_weight(Scalar r, Scalar g, Scalar b, Scalar eps = Scalar(1e-6)) {
  const Scalar hi = std::max({r, g, b});
  const Scalar lo = std::min({r, g, b});
  const Scalar base = (hi - lo) / (hi + eps);
  return std::clamp(base * base, Scalar(0), Scalar(1));
}

/// out = (1 - w) I + w M I per pixel, clamped to [0, 1].  Pixels with w = 0
/// are copied verbatim.
template <typename Scalar>
LinearImage<Scalar> apply_tint(const LinearImage<Scalar>& img, const TintCoefficients& coeffs,
                               Scalar eps = Scalar(1e-6)) {
  LinearImage<Scalar> out = img;
  if (coeffs == TintCoefficients{}) return out;
  const Scalar m[3] = {Scalar(coeffs.m_R), Scalar(coeffs.m_G), Scalar(coeffs.m_B)};
  const Eigen::Index n = img.pixel_count();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar px[3] = {img.r(i), img.g(i), img.b(i)};
    const Scalar w = tint_weight(px[0], px[1], px[2], eps);
    if (w == Scalar(0)) continue;
    for (int c = 0; c < 3; ++c) {
      const Scalar v = (Scalar(1) - w) * px[c] + w * (m[c] * px[c]);
      out.channel(c)(i) = std::clamp(v, Scalar(0), Scalar(1));
    }
  }
  return out;
}

}  // namespace moodisp
