#include "moodisp/stats/records.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>

namespace moodisp::stats {

using nlohmann::json;

namespace {

json alphas_to_json(const ControlVector& v) {
  json j = json::object();
  for (std::size_t i = 0; i < ControlVector::kSize; ++i) j[std::string(ControlVector::kNames[i])] = v[i];
  return j;
}

ControlVector alphas_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("'chosen' must be an object of alphas");
  ControlVector v;
  for (std::size_t i = 0; i < ControlVector::kSize; ++i)
    v[i] = j.at(std::string(ControlVector::kNames[i])).get<double>();
  return v;
}

void put_optional(json& j, const char* key, const std::optional<std::string>& v) {
  if (v) j[key] = *v;
}

std::optional<std::string> get_optional(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<std::string>();
  return std::nullopt;
}

template <typename Record, typename Parse>
std::vector<Record> read_lines(std::istream& in, Parse parse) {
  std::vector<Record> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const std::exception& e) {
      throw IoError("record line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void CalibrationRecord::validate() const {
  if (target_emotion == Emotion::Neutral)
    throw DomainError("calibration record targets Neutral");
  if (!chosen.is_finite()) throw DomainError("calibration record has non-finite alphas");
}

std::string_view to_string(AbChoice c) {
  return c == AbChoice::EmotionSide ? "emotion_side" : "neutral_side";
}

AbChoice parse_ab_choice(std::string_view s) {
  if (s == "emotion_side") return AbChoice::EmotionSide;
  if (s == "neutral_side") return AbChoice::NeutralSide;
  throw DomainError("choice must be 'emotion_side' or 'neutral_side', got '" + std::string(s) + "'");
}

void ABRecord::validate(bool allow_calm) const {
  if (shown_emotion == Emotion::Neutral) throw DomainError("A/B record shows Neutral");
  if (shown_emotion == Emotion::Calm && !allow_calm)
    throw DomainError("A/B record shows Calm, which the default protocol excludes");
}

std::string to_json_line(const CalibrationRecord& r) {
  json j;
  j["subject_id"] = r.subject_id;
  j["image_id"] = r.image_id;
  j["target_emotion"] = std::string(to_string(r.target_emotion));
  j["chosen"] = alphas_to_json(r.chosen);
  j["timestamp"] = r.timestamp;
  put_optional(j, "session_id", r.session_id);
  put_optional(j, "trial_id", r.trial_id);
  return j.dump();
}

std::string to_json_line(const ABRecord& r) {
  json j;
  j["subject_id"] = r.subject_id;
  j["clip_id"] = r.clip_id;
  j["shown_emotion"] = std::string(to_string(r.shown_emotion));
  j["is_correct_emotion"] = r.is_correct_emotion;
  j["emotion_side"] = std::string(to_string(r.emotion_side));
  j["choice"] = std::string(to_string(r.choice));
  j["timestamp"] = r.timestamp;
  put_optional(j, "session_id", r.session_id);
  put_optional(j, "trial_id", r.trial_id);
  return j.dump();
}

CalibrationRecord calibration_record_from_json(const std::string& line) {
  const json j = json::parse(line);
  CalibrationRecord r;
  r.subject_id = j.at("subject_id").get<std::string>();
  r.image_id = j.at("image_id").get<std::string>();
  r.target_emotion = parse_emotion(j.at("target_emotion").get<std::string>());
  r.chosen = alphas_from_json(j.at("chosen"));
  r.timestamp = j.value("timestamp", std::string());
  r.session_id = get_optional(j, "session_id");
  r.trial_id = get_optional(j, "trial_id");
  r.validate();
  return r;
}

ABRecord ab_record_from_json(const std::string& line) {
  const json j = json::parse(line);
  ABRecord r;
  r.subject_id = j.at("subject_id").get<std::string>();
  r.clip_id = j.at("clip_id").get<std::string>();
  r.shown_emotion = parse_emotion(j.at("shown_emotion").get<std::string>());
  r.is_correct_emotion = j.at("is_correct_emotion").get<bool>();
  r.emotion_side = parse_side(j.at("emotion_side").get<std::string>());
  r.choice = parse_ab_choice(j.at("choice").get<std::string>());
  r.timestamp = j.value("timestamp", std::string());
  r.session_id = get_optional(j, "session_id");
  r.trial_id = get_optional(j, "trial_id");
  return r;
}

std::vector<CalibrationRecord> read_calibration_records(std::istream& in) {
  return read_lines<CalibrationRecord>(in, calibration_record_from_json);
}

std::vector<ABRecord> read_ab_records(std::istream& in, bool allow_calm) {
  return read_lines<ABRecord>(in, [&](const std::string& line) {
    auto r = ab_record_from_json(line);
    r.validate(allow_calm);
    return r;
  });
}

std::vector<CalibrationRecord> load_calibration_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open record file '" + path + "'");
  return read_calibration_records(in);
}

std::vector<ABRecord> load_ab_records(const std::string& path, bool allow_calm) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open record file '" + path + "'");
  return read_ab_records(in, allow_calm);
}

}  // namespace moodisp::stats
