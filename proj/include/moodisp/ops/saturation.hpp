#pragma once

#include <algorithm>
#include <cmath>

#include "moodisp/core.hpp"

namespace moodisp {

/// Saturation gain 1 + alpha_S, capped for increases so that the scaled chroma
/// magnitude lands at most halfway between S and the gamut ceiling of 1.
/// Decreases pass through unmoderated.
template <typename Scalar>
Scalar moderated_saturation_gain(Scalar S, Scalar alpha_S, Scalar eps) {
  const Scalar target = Scalar(1) + alpha_S;
  if (!(alpha_S > Scalar(0))) return std::max(target, Scalar(0));
  const Scalar ceiling = (S + Scalar(0.5) * (Scalar(1) - S)) / (S + eps);
  return std::min(target, ceiling);
}

/// Scales each pixel's (C_R, C_B) by its moderated gain; Y is untouched.
template <typename Scalar>
LumaChroma<Scalar> apply_saturation(const LumaChroma<Scalar>& lc, Scalar alpha_S, Scalar eps) {
  LumaChroma<Scalar> out = lc;
  if (alpha_S == Scalar(0)) return out;
  const Eigen::Index n = lc.y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar cr = lc.cr(i), cb = lc.cb(i);
    const Scalar gain = moderated_saturation_gain(std::hypot(cr, cb), alpha_S, eps);
    out.cr(i) = gain * cr;
    out.cb(i) = gain * cb;
  }
  return out;
}

}  // namespace moodisp
