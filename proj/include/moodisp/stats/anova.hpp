#pragma once

#include <string>
#include <vector>

#include "moodisp/pipeline.hpp"
#include "moodisp/stats/records.hpp"

namespace moodisp::stats {

enum class EffectSize { Small, Medium, Large };

std::string_view to_string(EffectSize e);

/// Cohen's bands for (partial) eta squared: Small below 0.06, Medium below
/// 0.14, Large from 0.14.
EffectSize effect_size_class(double eta2);

struct AnovaResult {
  std::string parameter;
  double F = 0.0;
  double p = 1.0;
  double eta2 = 0.0;  ///< partial: SS_emotion / (SS_emotion + SS_error)
  EffectSize label = EffectSize::Small;

  double ss_emotion = 0.0;
  double ss_subject = 0.0;
  double ss_error = 0.0;
  int df_emotion = 0;
  int df_error = 0;
  int subjects = 0;
  int levels = 0;
};

/// What to do when a subject has no record for one of the emotion levels.
enum class MissingCells {
  Reject,             ///< throw InsufficientDataError
  ImputeEmotionMean,  ///< fill with the mean of the other subjects' cells
};

/// One-way repeated-measures ANOVA with emotion as the within-subject factor.
/// Raw records are averaged into per-subject, per-emotion cells first; the
/// levels are the emotions present in `records`.  No sphericity correction.
AnovaResult rm_anova(const std::vector<CalibrationRecord>& records, std::string_view parameter,
                     MissingCells missing = MissingCells::Reject);

/// rm_anova for all six alphas in control-vector order.
std::vector<AnovaResult> rm_anova_all(const std::vector<CalibrationRecord>& records,
                                      MissingCells missing = MissingCells::Reject);

/// Per emotion and alpha: median across subjects of each subject's mean,
/// rounded to two decimals.  Needs records for Happy, Calm, Angry and Sad.
std::vector<EmotionPreset> calibrate_presets(const std::vector<CalibrationRecord>& records);

/// Human-readable tables shaped like the published ones.
std::string format_anova_table(const std::vector<AnovaResult>& results);
std::string format_preset_table(const std::vector<EmotionPreset>& presets);

}  // namespace moodisp::stats
