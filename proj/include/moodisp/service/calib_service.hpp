#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "moodisp/ab_pairs.hpp"
#include "moodisp/stats/records.hpp"

namespace httplib {
class Server;
}

namespace moodisp::service {

/// Prompt shown with every calibration trial.
inline constexpr std::string_view kCalibrationInstruction =
    "Use the sliders to select a visual appearance for the image that best matches the target "
    "emotion.";

/// Question shown with every A/B pair.
inline constexpr std::string_view kAbQuestion =
    "As a movie director or content creator, which video result would you prefer to use?";

/// Longest side of a draft preview.
inline constexpr Eigen::Index kDraftMaxSide = 1024;

/// Errors carrying the HTTP status they map to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SessionMode { Calibration, AbTest };

struct TrialAssignment {
  std::string trial_id;
  std::string image_id;
  Emotion target_emotion = Emotion::Happy;
  std::string instruction;
  friend bool operator==(const TrialAssignment&, const TrialAssignment&) = default;
};

/// A blind A/B trial as served to the browser: media locations only, never
/// which side carries the emotion render.
struct AbAssignment {
  std::string trial_id;
  std::string clip_id;
  std::string question;
  std::size_t frames = 1;
};

struct SessionState {
  std::string session_id;
  std::string subject_id;
  std::uint64_t seed = 0;
  SessionMode mode = SessionMode::Calibration;
  std::size_t remaining = 0;
  std::size_t completed = 0;
};

/// One rendered A/B pair on disk, as listed in the make-pairs descriptor.
struct AbPairEntry {
  std::string pair_id;
  AbTrialDescriptor descriptor;
  std::string left_path, right_path;  ///< image files or frame directories
};

/// Reads the pairs descriptor written by `moodisp abtest make-pairs`
/// (one JSON object per line; media paths relative to the file's directory).
std::vector<AbPairEntry> load_ab_pairs(const std::string& descriptor_path);

enum class PreviewQuality { Draft, Full };

PreviewQuality parse_quality(std::string_view s);

/// Area-average downscale by the smallest integer factor that brings the
/// longest side to at most `max_side`.  Returns the input when it already fits.
Image downscale_for_draft(const Image& img, Eigen::Index max_side = kDraftMaxSide);

struct ServiceOptions {
  std::string image_dir;        ///< calibration corpus (.ppm / .png), id = file stem
  std::string calibration_log;  ///< CalibrationRecord lines are appended here
  std::string ab_log;           ///< ABRecord lines are appended here
  std::string ab_pairs;         ///< optional make-pairs descriptor for A/B sessions
  std::size_t trials_per_session = 0;  ///< 0 = every (image, emotion) pair
  PipelineConfig config;
};

/// Calibration-study backend.  Session operations are serialized; previews run
/// concurrently; record appends are serialized and flushed per record.
class CalibrationService {
 public:
  explicit CalibrationService(ServiceOptions options);

  const std::vector<std::string>& image_ids() const { return image_ids_; }

  SessionState start_session(const std::string& subject_id, std::optional<std::uint64_t> seed,
                             SessionMode mode = SessionMode::Calibration);

  /// Pops the next calibration trial.  404 for an unknown session, 410 once
  /// the queue is exhausted.
  TrialAssignment next_trial(const std::string& session_id);
  AbAssignment next_ab_trial(const std::string& session_id);
  SessionState session(const std::string& session_id) const;

  /// 8-bit sRGB PNG of the rendered image.  404 unknown image, 400 non-finite vector.
  std::vector<std::uint8_t> preview(const std::string& image_id, const ControlVector& v,
                                    PreviewQuality quality);
  /// Neutral full-quality render as PNG.
  std::vector<std::uint8_t> neutral_reference(const std::string& image_id);
  /// Raw bytes of one A/B media frame.
  std::vector<std::uint8_t> ab_media(const std::string& session_id, const std::string& trial_id,
                                     Side side, std::size_t frame);

  /// 404 unknown session or trial, 409 duplicate submission, 400 bad vector.
  stats::CalibrationRecord submit_calibration(const std::string& session_id,
                                              const std::string& trial_id, const ControlVector& v);
  /// `side_token` is "left" or "right" (400 otherwise).
  stats::ABRecord submit_ab_choice(const std::string& session_id, const std::string& trial_id,
                                   const std::string& side_token);

  /// Registers every endpoint on `server`.
  void mount(httplib::Server& server);

 private:
  struct Session {
    SessionState state;
    std::vector<TrialAssignment> queue;  // calibration
    std::vector<std::size_t> ab_queue;   // indices into ab_pairs_
    std::size_t next = 0;
    std::map<std::string, TrialAssignment> issued;
    std::map<std::string, std::size_t> issued_ab;
    std::set<std::string> submitted;
  };

  Session& find_session(const std::string& id);
  const Session& find_session(const std::string& id) const;
  std::shared_ptr<const Image> image(const std::string& id, PreviewQuality quality);
  void append(const std::string& path, const std::string& line);
  std::vector<std::string> frames_of(const std::string& path) const;

  ServiceOptions options_;
  std::vector<std::string> image_ids_;
  std::map<std::string, std::string> image_paths_;
  std::vector<AbPairEntry> ab_pairs_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, Session> sessions_;
  std::set<std::string> used_session_ids_;
  std::uint64_t session_counter_ = 0;

  std::mutex cache_mutex_;
  std::map<std::pair<std::string, int>, std::shared_ptr<const Image>> cache_;

  std::mutex log_mutex_;
};

}  // namespace moodisp::service
