#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moodisp/ab_pairs.hpp"
#include "moodisp/core.hpp"

namespace moodisp::stats {

/// One calibration trial: the control vector a participant settled on for a
/// target emotion.
struct CalibrationRecord {
  std::string subject_id;
  std::string image_id;
  Emotion target_emotion = Emotion::Happy;
  ControlVector chosen;
  std::string timestamp;
  std::optional<std::string> session_id;
  std::optional<std::string> trial_id;

  /// Throws DomainError on a Neutral target or non-finite alphas.
  void validate() const;
  friend bool operator==(const CalibrationRecord&, const CalibrationRecord&) = default;
};

enum class AbChoice { EmotionSide, NeutralSide };

std::string_view to_string(AbChoice c);
AbChoice parse_ab_choice(std::string_view s);

/// One blind A/B judgement.
struct ABRecord {
  std::string subject_id;
  std::string clip_id;
  Emotion shown_emotion = Emotion::Happy;
  bool is_correct_emotion = false;
  Side emotion_side = Side::Left;
  AbChoice choice = AbChoice::EmotionSide;
  std::string timestamp;
  std::optional<std::string> session_id;
  std::optional<std::string> trial_id;

  /// Throws DomainError when the shown emotion is Neutral, or Calm while
  /// `allow_calm` is false.
  void validate(bool allow_calm = false) const;
  friend bool operator==(const ABRecord&, const ABRecord&) = default;
};

// Line-delimited JSON, one record per line, field names as in the structs
// (alphas nested under "chosen").
std::string to_json_line(const CalibrationRecord& r);
std::string to_json_line(const ABRecord& r);
CalibrationRecord calibration_record_from_json(const std::string& line);
ABRecord ab_record_from_json(const std::string& line);

/// Reads every non-blank line; malformed lines throw IoError with the line number.
std::vector<CalibrationRecord> read_calibration_records(std::istream& in);
std::vector<ABRecord> read_ab_records(std::istream& in, bool allow_calm = false);
std::vector<CalibrationRecord> load_calibration_records(const std::string& path);
std::vector<ABRecord> load_ab_records(const std::string& path, bool allow_calm = false);

}  // namespace moodisp::stats
