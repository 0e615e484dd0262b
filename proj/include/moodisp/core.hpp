#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "moodisp/errors.hpp"

namespace moodisp {

/// Row-major raster plane; rows index y, columns index x.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Control vector
// ---------------------------------------------------------------------------

/// The six emotion modifiers, stored in the canonical order S, YB, RG, LC, B, P.
struct ControlVector {
  double alpha_S = 0.0;   ///< saturation
  double alpha_YB = 0.0;  ///< yellow-blue bias
  double alpha_RG = 0.0;  ///< red-green bias
  double alpha_LC = 0.0;  ///< local contrast boost
  double alpha_B = 0.0;   ///< brightness
  double alpha_P = 0.0;   ///< sharpening

  static constexpr std::size_t kSize = 6;
  static constexpr std::array<std::string_view, kSize> kNames = {
      "alpha_S", "alpha_YB", "alpha_RG", "alpha_LC", "alpha_B", "alpha_P"};

  static ControlVector from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
  std::array<double, kSize> to_array() const {
    return {alpha_S, alpha_YB, alpha_RG, alpha_LC, alpha_B, alpha_P};
  }

  double& operator[](std::size_t i);
  double operator[](std::size_t i) const;

  bool is_finite() const;
  bool is_zero() const;

  friend bool operator==(const ControlVector&, const ControlVector&) = default;
};

/// Parses "S,YB,RG,LC,B,P" (exactly six finite numbers); throws DomainError.
ControlVector parse_alphas(std::string_view text);
/// Formats in the same order with up to 17 significant digits.
std::string format_alphas(const ControlVector& v);

/// Index of an alpha name ("alpha_S", "S", ...); throws DomainError when unknown.
std::size_t alpha_index(std::string_view name);

// ---------------------------------------------------------------------------
// Emotions and valence/arousal
// ---------------------------------------------------------------------------

enum class Emotion { Happy, Calm, Angry, Sad, Neutral };

inline constexpr std::array<Emotion, 4> kStudyEmotions = {Emotion::Happy, Emotion::Calm,
                                                          Emotion::Angry, Emotion::Sad};

/// Lowercase name ("happy", ...).
std::string_view to_string(Emotion e);
/// Case-insensitive parse; throws DomainError on unknown names.
Emotion parse_emotion(std::string_view name);

struct VAVector {
  double valence = 0.0;
  double arousal = 0.0;
};

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// Linear-light RGB raster with samples normalized to [0, 1].
template <typename Scalar = double>
struct LinearImage {
  Plane<Scalar> r, g, b;

  LinearImage() = default;
  LinearImage(Eigen::Index width, Eigen::Index height)
      : r(Plane<Scalar>::Zero(height, width)),
        g(Plane<Scalar>::Zero(height, width)),
        b(Plane<Scalar>::Zero(height, width)) {}
  LinearImage(Plane<Scalar> red, Plane<Scalar> green, Plane<Scalar> blue)
      : r(std::move(red)), g(std::move(green)), b(std::move(blue)) {}

  Eigen::Index width() const { return r.cols(); }
  Eigen::Index height() const { return r.rows(); }
  Eigen::Index pixel_count() const { return r.size(); }
  bool empty() const { return r.size() == 0; }

  Plane<Scalar>& channel(int c) { return c == 0 ? r : (c == 1 ? g : b); }
  const Plane<Scalar>& channel(int c) const { return c == 0 ? r : (c == 1 ? g : b); }

  /// Throws DomainError unless the image is non-empty, planes agree in shape,
  /// and every sample lies in [0, 1].
  void validate() const {
    if (empty()) throw DomainError("image has zero size");
    if (g.rows() != r.rows() || g.cols() != r.cols() || b.rows() != r.rows() ||
        b.cols() != r.cols())
      throw DomainError("image planes differ in shape");
    for (int c = 0; c < 3; ++c) {
      const auto& p = channel(c);
      // NaN fails both comparisons, so it is rejected as well.
      if (!((p >= Scalar(0)).all() && (p <= Scalar(1)).all()))
        throw DomainError("image samples outside [0, 1]");
    }
  }

  template <typename Other>
  LinearImage<Other> cast() const {
    return {r.template cast<Other>(), g.template cast<Other>(), b.template cast<Other>()};
  }
};

using Image = LinearImage<double>;

/// Luminance plus opponent chroma.  S = ||(cr, cb)|| is derived, not stored.
template <typename Scalar = double>
struct LumaChroma {
  Plane<Scalar> y, cr, cb;

  Eigen::Index width() const { return y.cols(); }
  Eigen::Index height() const { return y.rows(); }

  Plane<Scalar> chroma_magnitude() const { return (cr.square() + cb.square()).sqrt(); }
};

// BT.709 luma weights.
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

/// Y = 0.2126 R + 0.7152 G + 0.0722 B, C_R = (R - Y)/2, C_B = (B - Y)/2.
///
/// Y is evaluated relative to R so that any pixel with R = G = B yields
/// Y = R and chroma (0, 0) exactly.
template <typename Scalar>
LumaChroma<Scalar> rgb_to_lumachroma(const LinearImage<Scalar>& img) {
  const Scalar wg(kLumaG), wb(kLumaB), half(0.5);
  LumaChroma<Scalar> lc;
  lc.y = img.r + wg * (img.g - img.r) + wb * (img.b - img.r);
  lc.cr = half * (img.r - lc.y);
  lc.cb = half * (img.b - lc.y);
  return lc;
}

/// Exact inverse of rgb_to_lumachroma, clamped to [0, 1].
template <typename Scalar>
LinearImage<Scalar> lumachroma_to_rgb(const LumaChroma<Scalar>& lc) {
  const Scalar two(2), wr(kLumaR), wb(kLumaB), wg(kLumaG);
  LinearImage<Scalar> out;
  out.r = (lc.y + two * lc.cr).max(Scalar(0)).min(Scalar(1));
  out.b = (lc.y + two * lc.cb).max(Scalar(0)).min(Scalar(1));
  out.g = (lc.y - (two * wr * lc.cr + two * wb * lc.cb) / wg).max(Scalar(0)).min(Scalar(1));
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

/// Pixel rectangle [x, x+width) x [y, y+height).
struct Roi {
  Eigen::Index x = 0, y = 0, width = 0, height = 0;
  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Every constant the rendering chain needs beyond the control vector.
struct PipelineConfig {
  double eps = 1e-6;    ///< numerical stability constant
  double T = 0.18;      ///< target ROI luminance for the brightness exponent
  /// Use the current ROI mean as the target instead of T, so that a zero
  /// brightness modifier leaves exposure untouched.
  bool anchor_to_roi_mean = false;
  double zeta = 0.0;     ///< baseline local-contrast modifier
  double p = 0.5;        ///< baseline sharpening gain
  double sigma = 1.5;    ///< Gaussian blur std-dev in pixels
  int gf_radius = 8;     ///< guided filter window radius
  double gf_eps = 1e-3;  ///< guided filter regularizer
  int clahe_tiles_x = 8;
  int clahe_tiles_y = 8;
  double clahe_clip = 2.0;  ///< clip limit in units of the uniform bin height
  /// Allowed excursion of sharpened samples beyond the local window extrema.
  double overshoot_margin = 0.0;
  std::optional<Roi> roi;  ///< luminance averaging region; whole frame when empty

  /// Throws DomainError on any violated invariant.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Parses the plain `key = value` config format.  Unknown keys, malformed
/// values and invariant violations throw DomainError.  `#` starts a comment.
PipelineConfig parse_pipeline_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_pipeline_config(const std::string& path, PipelineConfig base = {});
std::string format_pipeline_config(const PipelineConfig& cfg);

}  // namespace moodisp
