#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "moodisp/image_codes.hpp"

namespace moodisp {

/// Standard sRGB piecewise transfer functions on [0, 1].
double srgb_eotf(double encoded);
double srgb_oetf(double linear);

/// Monotone piecewise-cubic (Fritsch-Carlson) curve through control points
/// with strictly increasing x and y.  Used as an optional global inverse
/// tone curve applied after the transfer function.
class MonotoneSpline {
 public:
  /// Throws DomainError unless there are >= 2 points and both coordinates are
  /// strictly increasing.
  MonotoneSpline(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  /// Inverse by bisection; exact to ~1e-15 inside the curve's range.
  double inverse(double y) const;

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  std::vector<double> xs_, ys_, slopes_;
};

struct InverseConfig {
  enum class Transfer { SrgbEotf, PureGamma };
  Transfer transfer = Transfer::SrgbEotf;
  double gamma = 2.2;  ///< exponent for PureGamma
  std::optional<MonotoneSpline> tone_curve;
  /// Display-to-sensor color matrix applied last; identity ships by default.
  Eigen::Matrix3d color_matrix = Eigen::Matrix3d::Identity();

  static InverseConfig srgb() { return {}; }
  static InverseConfig pure_gamma(double g) {
    InverseConfig c;
    c.transfer = Transfer::PureGamma;
    c.gamma = g;
    return c;
  }

  void validate() const;
};

/// Per-code linear value table for one channel (256 entries, strictly increasing).
std::vector<double> linearize_table(const InverseConfig& cfg);

/// 8-bit display-referred codes to linear light in [0, 1].
Image linearize(const Srgb8Image& img, const InverseConfig& cfg = {});

/// Exact forward of `cfg` followed by round-half-up quantization to 8 bits.
Srgb8Image delinearize(const Image& img, const InverseConfig& cfg = {});

/// Forward-encodes one linear sample without quantization.
double encode_sample(double linear, const InverseConfig& cfg);

/// Peak signal-to-noise ratio of two 8-bit images in dB (infinite when equal).
double psnr(const Srgb8Image& a, const Srgb8Image& b);

}  // namespace moodisp
