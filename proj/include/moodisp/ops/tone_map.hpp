#pragma once

#include <cmath>
#include <string>

#include "moodisp/ops/clahe.hpp"
#include "moodisp/ops/guided_filter.hpp"

namespace moodisp {

/// beta = log(T (1 + alpha_B)) / log(avg_Y): the power that moves the ROI
/// average luminance onto the scaled target.
inline double brightness_exponent(double avg_Y, double alpha_B, double T) {
  if (!(avg_Y > 0.0 && avg_Y < 1.0))
    throw DomainError("brightness_exponent: degenerate exposure, ROI mean luminance " +
                      std::to_string(avg_Y) + " not in (0, 1)");
  const double target = T * (1.0 + alpha_B);
  if (!(target > 0.0 && target < 1.0))
    throw DomainError("brightness_exponent: target luminance " + std::to_string(target) +
                      " not in (0, 1)");
  return std::log(target) / std::log(avg_Y);
}

/// Mean of Y over `roi` (whole plane when empty), summed in double precision
/// in row-major order.
template <typename Scalar>
double roi_mean_luminance(const Plane<Scalar>& Y, const std::optional<Roi>& roi) {
  Eigen::Index x0 = 0, y0 = 0, w = Y.cols(), h = Y.rows();
  if (roi) {
    x0 = roi->x;
    y0 = roi->y;
    w = roi->width;
    h = roi->height;
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > Y.cols() || y0 + h > Y.rows())
      throw DomainError("roi lies outside the image");
  }
  if (w * h == 0) throw DomainError("roi is empty");
  double sum = 0.0;
  for (Eigen::Index y = y0; y < y0 + h; ++y)
    for (Eigen::Index x = x0; x < x0 + w; ++x) sum += static_cast<double>(Y(y, x));
  return sum / static_cast<double>(w * h);
}

/// Exponent the tone mapper applies for this plane and configuration.
template <typename Scalar>
double tone_map_exponent(const Plane<Scalar>& Y, double alpha_B, const PipelineConfig& cfg) {
  const double avg = roi_mean_luminance(Y, cfg.roi);
  const double target = cfg.anchor_to_roi_mean ? avg : cfg.T;
  return brightness_exponent(avg, alpha_B, target);
}

/// Local tone mapping:
///   Y_TM = (1 + (zeta + alpha_LC) (Y - B) / max(B, eps)) * CLAHE(Y^beta)
/// with B the guided-filter base layer of Y.  Output clamped to [0, 1].
template <typename Scalar>
Plane<Scalar> tone_map(const Plane<Scalar>& Y, double alpha_B, double alpha_LC,
                       const PipelineConfig& cfg) {
  const double beta = tone_map_exponent(Y, alpha_B, cfg);
  const Plane<Scalar> graded = beta == 1.0 ? Y : Plane<Scalar>(Y.pow(static_cast<Scalar>(beta)));
  Plane<Scalar> out = clahe(graded, cfg.clahe_tiles_x, cfg.clahe_tiles_y, cfg.clahe_clip);

  const double boost = cfg.zeta + alpha_LC;
  if (boost != 0.0) {
    const Plane<Scalar> base = guided_filter(Y, cfg.gf_radius, cfg.gf_eps);
    const Scalar k = static_cast<Scalar>(boost);
    out *= Scalar(1) + k * (Y - base) / base.max(static_cast<Scalar>(cfg.eps));
  }
  return out.max(Scalar(0)).min(Scalar(1));
}

}  // namespace moodisp
