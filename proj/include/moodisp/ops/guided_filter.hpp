#pragma once

#include "moodisp/ops/filters.hpp"

namespace moodisp {

/// Self-guided filter (guide = input).  Per window k the local model is
/// q = a_k I + b_k with a_k = var_k / (var_k + eps), b_k = (1 - a_k) mean_k;
/// each output averages the coefficients of every window covering the pixel.
///
/// The filter commutes with a constant offset, so the statistics are taken on
/// the plane shifted by its first sample; constant planes come back exact.
template <typename Scalar>
Plane<Scalar> guided_filter(const Plane<Scalar>& Y, int radius, double gf_eps) {
  if (radius < 1) throw DomainError("guided_filter: radius must be >= 1");
  if (!(gf_eps > 0)) throw DomainError("guided_filter: regularizer must be > 0");
  using P = Plane<double>;
  if (Y.size() == 0) return Y;
  const double offset = static_cast<double>(Y(0, 0));
  const P I = Y.template cast<double>() - offset;
  const P mean_I = box_mean(I, radius);
  const P var = (box_mean(I.square(), radius) - mean_I.square()).max(0.0);
  const P a = var / (var + gf_eps);
  const P b = mean_I - a * mean_I;
  const P q = box_mean(a, radius) * I + box_mean(b, radius);
  return (q + offset).template cast<Scalar>();
}

}  // namespace moodisp
