#include "moodisp/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "moodisp/inverse_isp.hpp"

namespace moodisp {

ControlVector preset_for_emotion(Emotion e) {
  //                   S      YB     RG     LC     B      P
  switch (e) {
    case Emotion::Happy: return {0.2, 0.0, 0.0, 0.14, 0.19, 0.0};
    case Emotion::Calm: return {0.0, 0.0, 0.0, 0.0, 0.0, -0.2};
    case Emotion::Angry: return {0.15, 0.0, 0.19, 0.32, -0.08, 0.7};
    case Emotion::Sad: return {-0.18, -0.1, 0.0, -0.02, -0.09, 0.0};
    case Emotion::Neutral: return {};
  }
  return {};
}

std::vector<EmotionPreset> shipped_presets() {
  std::vector<EmotionPreset> out;
  for (auto e : {Emotion::Happy, Emotion::Calm, Emotion::Angry, Emotion::Sad, Emotion::Neutral})
    out.push_back({e, preset_for_emotion(e)});
  return out;
}

std::string export_presets_text(const std::vector<EmotionPreset>& presets) {
  std::ostringstream out;
  out << "# emotion.parameter = value\n";
  for (const auto& p : presets)
    for (std::size_t i = 0; i < ControlVector::kSize; ++i)
      out << to_string(p.emotion) << '.' << ControlVector::kNames[i] << " = " << p.vector[i] << '\n';
  return out.str();
}

std::vector<EmotionPreset> parse_presets_text(const std::string& text) {
  std::vector<EmotionPreset> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto dot = line.find('.');
    const auto eq = line.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq)
      throw DomainError("preset line '" + line + "' is not 'emotion.alpha_X = value'");
    const Emotion e = parse_emotion(line.substr(0, dot));
    std::string key = line.substr(dot + 1, eq - dot - 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    const std::size_t idx = alpha_index(key);
    const double value = std::stod(line.substr(eq + 1));
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.emotion == e; });
    if (it == out.end()) {
      out.push_back({e, {}});
      it = std::prev(out.end());
    }
    it->vector[idx] = value;
  }
  return out;
}

Emotion quadrant_from_va(const VAVector& va) {
  if (!std::isfinite(va.valence) || !std::isfinite(va.arousal))
    throw BorderCaseError("valence/arousal must be finite");
  if (va.valence == 0.0 || va.arousal == 0.0)
    throw BorderCaseError("valence/arousal on a quadrant border (zero component)");
  if (va.valence > 0) return va.arousal > 0 ? Emotion::Happy : Emotion::Calm;
  return va.arousal > 0 ? Emotion::Angry : Emotion::Sad;
}

EncodedImage render(const RenderRequest& req) {
  if (req.image == nullptr) throw DomainError("render request has no image");
  const Image out = render_linear(*req.image, req.vector, req.config);
  if (req.encoding == OutputEncoding::Linear16) return quantize_linear16(out);
  return delinearize(out, InverseConfig::srgb());
}

}  // namespace moodisp
