#pragma once

#include <cmath>

#include "moodisp/ops/filters.hpp"

namespace moodisp {

/// Half-width of the window the overshoot mask measures local extrema over.
inline int overshoot_window_radius(double sigma) {
  return std::max(1, static_cast<int>(std::ceil(2.0 * sigma)));
}

/// Unsharp masking with overshoot protection:
///   Y_S = Y + (p + alpha_P) (Y - G_sigma(Y)) M(Y)
/// M(Y) is the largest factor in [0, 1] that keeps the sample inside
/// [local min - margin, local max + margin] of its input neighbourhood.
template <typename Scalar>
Plane<Scalar> sharpen(const Plane<Scalar>& Y, double alpha_P, const PipelineConfig& cfg) {
  const double gain = cfg.p + alpha_P;
  if (gain == 0.0 || Y.size() == 0) return Y;
  const Plane<Scalar> blurred = gaussian_blur(Y, cfg.sigma);
  Plane<Scalar> lo, hi;
  window_extrema(Y, overshoot_window_radius(cfg.sigma), lo, hi);

  const double margin = cfg.overshoot_margin;
  Plane<Scalar> out(Y.rows(), Y.cols());
  for (Eigen::Index i = 0; i < Y.size(); ++i) {
    const double y = static_cast<double>(Y(i));
    const double delta = gain * (y - static_cast<double>(blurred(i)));
    double mask = 1.0;
    if (delta > 0.0) {
      const double room = static_cast<double>(hi(i)) + margin - y;
      if (delta > room) mask = std::max(0.0, room) / delta;
    } else if (delta < 0.0) {
      const double room = y - (static_cast<double>(lo(i)) - margin);
      if (-delta > room) mask = std::max(0.0, room) / -delta;
    }
    out(i) = static_cast<Scalar>(std::clamp(y + mask * delta, 0.0, 1.0));
  }
  return out;
}

}  // namespace moodisp
