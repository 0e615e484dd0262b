#pragma once

#include <string>
#include <variant>
#include <vector>

#include "moodisp/image_codes.hpp"
#include "moodisp/ops/saturation.hpp"
#include "moodisp/ops/sharpen.hpp"
#include "moodisp/ops/tint.hpp"
#include "moodisp/ops/tone_map.hpp"

namespace moodisp {

// ---------------------------------------------------------------------------
// Presets and the valence/arousal quadrants
// ---------------------------------------------------------------------------

struct EmotionPreset {
  Emotion emotion = Emotion::Neutral;
  ControlVector vector;
  friend bool operator==(const EmotionPreset&, const EmotionPreset&) = default;
};

/// Calibrated control vector for an emotion; Neutral is all zeros.
ControlVector preset_for_emotion(Emotion e);

/// Presets for Happy, Calm, Angry, Sad and Neutral, in that order.
std::vector<EmotionPreset> shipped_presets();

/// `emotion.alpha_X = value` lines, one per preset cell.
std::string export_presets_text(const std::vector<EmotionPreset>& presets = shipped_presets());
std::vector<EmotionPreset> parse_presets_text(const std::string& text);

/// (+,+) Happy, (+,-) Calm, (-,+) Angry, (-,-) Sad.  A zero or non-finite
/// component throws BorderCaseError.
Emotion quadrant_from_va(const VAVector& va);

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Runs the controlled chain on a linear image:
///   saturation -> tint -> tone map (brightness + local contrast) -> sharpen.
/// Saturation and tint act in linear RGB; tone mapping and sharpening act on
/// luminance, and the final luminance gain is applied to chroma as well so
/// that each pixel keeps its chromaticity.
template <typename Scalar>
LinearImage<Scalar> render_linear(const LinearImage<Scalar>& img, const ControlVector& v,
                                  const PipelineConfig& cfg) {
  img.validate();
  cfg.validate();
  if (!v.is_finite()) throw DomainError("control vector has non-finite entries");
  const Scalar eps = static_cast<Scalar>(cfg.eps);

  LinearImage<Scalar> colored = img;
  if (v.alpha_S != 0.0)
    colored = lumachroma_to_rgb(
        apply_saturation(rgb_to_lumachroma(img), static_cast<Scalar>(v.alpha_S), eps));
  colored = apply_tint(colored, tint_coefficients(v.alpha_RG, v.alpha_YB), eps);

  LumaChroma<Scalar> lc = rgb_to_lumachroma(colored);
  const Plane<Scalar> toned = tone_map(lc.y, v.alpha_B, v.alpha_LC, cfg);
  const Plane<Scalar> sharp = sharpen(toned, v.alpha_P, cfg);

  for (Eigen::Index i = 0; i < lc.y.size(); ++i) {
    const Scalar y = lc.y(i);
    const Scalar gain = y > Scalar(0) ? (sharp(i) == y ? Scalar(1) : sharp(i) / y) : Scalar(0);
    lc.cr(i) *= gain;
    lc.cb(i) *= gain;
    lc.y(i) = sharp(i);
  }
  return lumachroma_to_rgb(lc);
}

enum class OutputEncoding { Srgb8, Linear16 };

struct RenderRequest {
  const Image* image = nullptr;
  ControlVector vector;
  PipelineConfig config;
  OutputEncoding encoding = OutputEncoding::Linear16;
};

using EncodedImage = std::variant<Srgb8Image, Linear16Image>;

/// render_linear followed by quantization to the requested encoding.
EncodedImage render(const RenderRequest& req);

}  // namespace moodisp
