#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "moodisp/pipeline.hpp"

namespace moodisp {

enum class Side { Left, Right };

std::string_view to_string(Side s);
Side parse_side(std::string_view s);

/// What one A/B trial showed.  The neutral render occupies the side opposite
/// `emotion_side`.
struct AbTrialDescriptor {
  std::string image_id;
  Emotion shown_emotion = Emotion::Neutral;
  bool is_correct_emotion = false;
  Side emotion_side = Side::Left;
  friend bool operator==(const AbTrialDescriptor&, const AbTrialDescriptor&) = default;
};

struct AbPair {
  Image left, right;
  AbTrialDescriptor descriptor;

  const Image& neutral() const { return descriptor.emotion_side == Side::Left ? right : left; }
  const Image& emotion() const { return descriptor.emotion_side == Side::Left ? left : right; }
};

/// Renders the neutral baseline and the emotion under test (the correct one
/// when `show_correct`, otherwise `wrong`), drawing the left/right placement
/// from `rng`.
AbPair render_ab_pair(const Image& image, const std::string& image_id, Emotion correct,
                      Emotion wrong, bool show_correct, const PipelineConfig& cfg,
                      std::mt19937_64& rng);

/// A labeled clip (or still image) offered to the A/B harness.
struct AbClip {
  std::string clip_id;
  std::string path;  ///< image file or directory of frames
  VAVector va;
};

struct AbTrialPlan {
  std::string clip_id;
  std::string path;
  Emotion correct = Emotion::Neutral;
  Emotion wrong = Emotion::Neutral;
  bool show_correct = true;
};

/// Assigns each clip its label emotion (via the valence/arousal quadrant),
/// a balanced correct/wrong condition and a wrong emotion, all from `seed`.
/// Calm clips are dropped unless `include_calm`; the wrong emotion is never
/// Calm under the default protocol.  Border-case labels throw
/// BorderCaseError naming the clip.
std::vector<AbTrialPlan> plan_ab_trials(const std::vector<AbClip>& clips, std::uint64_t seed,
                                        bool include_calm = false);

}  // namespace moodisp
