#include "moodisp/ab_pairs.hpp"

#include <algorithm>

namespace moodisp {

std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }

Side parse_side(std::string_view s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw DomainError("side must be 'left' or 'right', got '" + std::string(s) + "'");
}

AbPair render_ab_pair(const Image& image, const std::string& image_id, Emotion correct,
                      Emotion wrong, bool show_correct, const PipelineConfig& cfg,
                      std::mt19937_64& rng) {
  if (correct == Emotion::Neutral) throw DomainError("A/B trial: correct emotion is Neutral");
  const Emotion shown = show_correct ? correct : wrong;
  if (shown == Emotion::Neutral) throw DomainError("A/B trial: shown emotion is Neutral");
  if (!show_correct && wrong == correct)
    throw DomainError("A/B trial: wrong emotion equals the correct one");

  AbPair pair;
  pair.descriptor = {image_id, shown, show_correct, (rng() >> 63) ? Side::Right : Side::Left};
  Image neutral = render_linear(image, ControlVector{}, cfg);
  Image emotional = render_linear(image, preset_for_emotion(shown), cfg);
  if (pair.descriptor.emotion_side == Side::Left) {
    pair.left = std::move(emotional);
    pair.right = std::move(neutral);
  } else {
    pair.left = std::move(neutral);
    pair.right = std::move(emotional);
  }
  return pair;
}

std::vector<AbTrialPlan> plan_ab_trials(const std::vector<AbClip>& clips, std::uint64_t seed,
                                        bool include_calm) {
  std::vector<AbTrialPlan> plans;
  for (const auto& clip : clips) {
    Emotion e;
    try {
      e = quadrant_from_va(clip.va);
    } catch (const BorderCaseError& err) {
      throw BorderCaseError("clip '" + clip.clip_id + "': " + err.what());
    }
    if (e == Emotion::Calm && !include_calm) continue;
    plans.push_back({clip.clip_id, clip.path, e, Emotion::Neutral, true});
  }

  std::mt19937_64 rng(seed);
  // Balanced conditions: the first half (rounded up) shows the correct emotion.
  std::vector<bool> correct(plans.size(), false);
  std::fill(correct.begin(), correct.begin() + static_cast<long>((plans.size() + 1) / 2), true);
  std::shuffle(correct.begin(), correct.end(), rng);

  std::vector<Emotion> pool = {Emotion::Happy, Emotion::Angry, Emotion::Sad};
  if (include_calm) pool.push_back(Emotion::Calm);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    auto& plan = plans[i];
    plan.show_correct = correct[i];
    std::vector<Emotion> others;
    std::copy_if(pool.begin(), pool.end(), std::back_inserter(others),
                 [&](Emotion x) { return x != plan.correct; });
    std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
    plan.wrong = others[pick(rng)];
  }
  return plans;
}

}  // namespace moodisp
