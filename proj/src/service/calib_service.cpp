#include "moodisp/service/calib_service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include "moodisp/inverse_isp.hpp"
#include "moodisp/io.hpp"
#include "moodisp/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace moodisp::service {

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

std::string numbered(char prefix, std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%04llu", prefix, static_cast<unsigned long long>(n));
  return buf;
}

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".ppm" || ext == ".png";
}

json to_json(const SessionState& s) {
  return {{"session_id", s.session_id},
          {"subject_id", s.subject_id},
          {"seed", s.seed},
          {"mode", s.mode == SessionMode::Calibration ? "calibration" : "ab"},
          {"remaining", s.remaining},
          {"completed", s.completed}};
}


void collect_session_ids(const std::string& path, std::set<std::string>& ids) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.contains("session_id") && j["session_id"].is_string())
      ids.insert(j["session_id"].get<std::string>());
  }
}

}  // namespace

PreviewQuality parse_quality(std::string_view s) {
  if (s == "draft") return PreviewQuality::Draft;
  if (s == "full") return PreviewQuality::Full;
  throw ServiceError(400, "quality must be 'draft' or 'full'");
}

Image downscale_for_draft(const Image& img, Eigen::Index max_side) {
  const Eigen::Index longest = std::max(img.width(), img.height());
  if (longest <= max_side) return img;
  const Eigen::Index f = (longest + max_side - 1) / max_side;
  const Eigen::Index w = (img.width() + f - 1) / f, h = (img.height() + f - 1) / f;
  Image out(w, h);
  for (int c = 0; c < 3; ++c) {
    const auto& src = img.channel(c);
    auto& dst = out.channel(c);
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        const Eigen::Index bh = std::min(f, img.height() - y * f);
        const Eigen::Index bw = std::min(f, img.width() - x * f);
        dst(y, x) = src.block(y * f, x * f, bh, bw).sum() / static_cast<double>(bh * bw);
      }
  }
  return out;
}

std::vector<AbPairEntry> load_ab_pairs(const std::string& descriptor_path) {
  std::ifstream in(descriptor_path);
  if (!in) throw IoError("cannot open pairs descriptor '" + descriptor_path + "'");
  const fs::path base = fs::path(descriptor_path).parent_path();
  std::vector<AbPairEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      AbPairEntry e;
      e.pair_id = j.at("pair_id").get<std::string>();
      e.descriptor.image_id = j.at("clip_id").get<std::string>();
      e.descriptor.shown_emotion = parse_emotion(j.at("shown_emotion").get<std::string>());
      e.descriptor.is_correct_emotion = j.at("is_correct_emotion").get<bool>();
      e.descriptor.emotion_side = parse_side(j.at("emotion_side").get<std::string>());
      e.left_path = (base / j.at("left").get<std::string>()).string();
      e.right_path = (base / j.at("right").get<std::string>()).string();
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw IoError("pairs descriptor line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

CalibrationService::CalibrationService(ServiceOptions options) : options_(std::move(options)) {
  options_.config.validate();
  if (options_.image_dir.empty() || !fs::is_directory(options_.image_dir))
    throw IoError("image directory '" + options_.image_dir + "' does not exist");
  for (const auto& entry : fs::directory_iterator(options_.image_dir)) {
    if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
    const auto id = entry.path().stem().string();
    if (image_paths_.count(id)) throw IoError("duplicate image id '" + id + "'");
    image_paths_[id] = entry.path().string();
  }
  for (const auto& [id, path] : image_paths_) image_ids_.push_back(id);
  if (!options_.ab_pairs.empty()) ab_pairs_ = load_ab_pairs(options_.ab_pairs);
  collect_session_ids(options_.calibration_log, used_session_ids_);
  collect_session_ids(options_.ab_log, used_session_ids_);
}

SessionState CalibrationService::start_session(const std::string& subject_id,
                                               std::optional<std::uint64_t> seed, SessionMode mode) {
  if (subject_id.empty()) throw ServiceError(400, "subject id is required");
  Session s;
  s.state.subject_id = subject_id;
  s.state.seed = seed ? *seed : std::random_device{}();
  s.state.mode = mode;
  std::mt19937_64 rng(s.state.seed);

  if (mode == SessionMode::Calibration) {
    if (image_ids_.empty()) throw ServiceError(409, "image corpus is empty");
    std::vector<std::pair<std::string, Emotion>> plan;
    for (const auto& id : image_ids_)
      for (const Emotion e : kStudyEmotions) plan.emplace_back(id, e);
    std::shuffle(plan.begin(), plan.end(), rng);
    if (options_.trials_per_session > 0 && plan.size() > options_.trials_per_session)
      plan.resize(options_.trials_per_session);
    for (std::size_t i = 0; i < plan.size(); ++i)
      s.queue.push_back({numbered('t', i + 1), plan[i].first, plan[i].second,
                         std::string(kCalibrationInstruction)});
    s.state.remaining = s.queue.size();
  } else {
    if (ab_pairs_.empty()) throw ServiceError(409, "no A/B pairs are loaded");
    s.ab_queue.resize(ab_pairs_.size());
    for (std::size_t i = 0; i < s.ab_queue.size(); ++i) s.ab_queue[i] = i;
    std::shuffle(s.ab_queue.begin(), s.ab_queue.end(), rng);
    if (options_.trials_per_session > 0 && s.ab_queue.size() > options_.trials_per_session)
      s.ab_queue.resize(options_.trials_per_session);
    s.state.remaining = s.ab_queue.size();
  }

  std::lock_guard lock(sessions_mutex_);
  do {
    s.state.session_id = numbered('s', ++session_counter_);
  } while (used_session_ids_.count(s.state.session_id));
  used_session_ids_.insert(s.state.session_id);
  const SessionState state = s.state;
  sessions_.emplace(state.session_id, std::move(s));
  return state;
}

CalibrationService::Session& CalibrationService::find_session(const std::string& id) {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

const CalibrationService::Session& CalibrationService::find_session(const std::string& id) const {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

SessionState CalibrationService::session(const std::string& session_id) const {
  std::lock_guard lock(sessions_mutex_);
  return find_session(session_id).state;
}

TrialAssignment CalibrationService::next_trial(const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  Session& s = find_session(session_id);
  if (s.state.mode != SessionMode::Calibration)
    throw ServiceError(400, "session '" + session_id + "' is an A/B session");
  if (s.next >= s.queue.size()) throw ServiceError(410, "session exhausted");
  const TrialAssignment t = s.queue[s.next++];
  s.issued[t.trial_id] = t;
  s.state.remaining = s.queue.size() - s.next;
  return t;
}

AbAssignment CalibrationService::next_ab_trial(const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  Session& s = find_session(session_id);
  if (s.state.mode != SessionMode::AbTest)
    throw ServiceError(400, "session '" + session_id + "' is a calibration session");
  if (s.next >= s.ab_queue.size()) throw ServiceError(410, "session exhausted");
  const std::size_t idx = s.ab_queue[s.next];
  const std::string trial_id = numbered('t', ++s.next);
  s.issued_ab[trial_id] = idx;
  s.state.remaining = s.ab_queue.size() - s.next;
  const auto& pair = ab_pairs_[idx];
  return {trial_id, pair.descriptor.image_id, std::string(kAbQuestion),
          frames_of(pair.left_path).size()};
}

std::vector<std::string> CalibrationService::frames_of(const std::string& path) const {
  if (!fs::is_directory(path)) return {path};
  std::vector<std::string> frames;
  for (const auto& e : fs::directory_iterator(path))
    if (e.is_regular_file()) frames.push_back(e.path().string());
  std::sort(frames.begin(), frames.end());
  return frames;
}

std::shared_ptr<const Image> CalibrationService::image(const std::string& id,
                                                       PreviewQuality quality) {
  const auto key = std::make_pair(id, static_cast<int>(quality));
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const auto path = image_paths_.find(id);
  if (path == image_paths_.end()) throw ServiceError(404, "unknown image '" + id + "'");
  auto full = std::make_shared<const Image>(load_image(path->second));
  std::shared_ptr<const Image> result = full;
  if (quality == PreviewQuality::Draft)
    result = std::make_shared<const Image>(downscale_for_draft(*full));
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(std::make_pair(id, static_cast<int>(PreviewQuality::Full)), full);
  return cache_.emplace(key, result).first->second;
}

std::vector<std::uint8_t> CalibrationService::preview(const std::string& image_id,
                                                      const ControlVector& v,
                                                      PreviewQuality quality) {
  if (!v.is_finite()) throw ServiceError(400, "control vector has non-finite entries");
  const auto img = image(image_id, quality);
  try {
    return encode_png(delinearize(render_linear(*img, v, options_.config)));
  } catch (const DomainError& e) {
    throw ServiceError(422, e.what());
  }
}

std::vector<std::uint8_t> CalibrationService::neutral_reference(const std::string& image_id) {
  return preview(image_id, ControlVector{}, PreviewQuality::Full);
}

std::vector<std::uint8_t> CalibrationService::ab_media(const std::string& session_id,
                                                       const std::string& trial_id, Side side,
                                                       std::size_t frame) {
  std::string path;
  {
    std::lock_guard lock(sessions_mutex_);
    Session& s = find_session(session_id);
    const auto it = s.issued_ab.find(trial_id);
    if (it == s.issued_ab.end()) throw ServiceError(404, "unknown trial '" + trial_id + "'");
    const auto& pair = ab_pairs_[it->second];
    path = side == Side::Left ? pair.left_path : pair.right_path;
  }
  const auto frames = frames_of(path);
  if (frame >= frames.size()) throw ServiceError(404, "frame index out of range");
  return read_file_bytes(frames[frame]);
}

void CalibrationService::append(const std::string& path, const std::string& line) {
  if (path.empty()) return;
  std::lock_guard lock(log_mutex_);
  std::ofstream out(path, std::ios::app);
  if (!out) throw ServiceError(500, "cannot append to record log '" + path + "'");
  out << line << '\n';
  out.flush();
  if (!out) throw ServiceError(500, "write failed for record log '" + path + "'");
}

stats::CalibrationRecord CalibrationService::submit_calibration(const std::string& session_id,
                                                                const std::string& trial_id,
                                                                const ControlVector& v) {
  if (!v.is_finite()) throw ServiceError(400, "control vector has non-finite entries");
  stats::CalibrationRecord rec;
  {
    std::lock_guard lock(sessions_mutex_);
    Session& s = find_session(session_id);
    const auto it = s.issued.find(trial_id);
    if (it == s.issued.end()) throw ServiceError(404, "unknown trial '" + trial_id + "'");
    if (s.submitted.count(trial_id)) throw ServiceError(409, "trial already submitted");
    rec.subject_id = s.state.subject_id;
    rec.image_id = it->second.image_id;
    rec.target_emotion = it->second.target_emotion;
    rec.chosen = v;
    rec.timestamp = utc_timestamp();
    rec.session_id = session_id;
    rec.trial_id = trial_id;
    append(options_.calibration_log, stats::to_json_line(rec));
    s.submitted.insert(trial_id);
    s.state.completed += 1;
  }
  return rec;
}

stats::ABRecord CalibrationService::submit_ab_choice(const std::string& session_id,
                                                     const std::string& trial_id,
                                                     const std::string& side_token) {
  Side side;
  try {
    side = parse_side(side_token);
  } catch (const DomainError& e) {
    throw ServiceError(400, e.what());
  }
  stats::ABRecord rec;
  {
    std::lock_guard lock(sessions_mutex_);
    Session& s = find_session(session_id);
    const auto it = s.issued_ab.find(trial_id);
    if (it == s.issued_ab.end()) throw ServiceError(404, "unknown trial '" + trial_id + "'");
    if (s.submitted.count(trial_id)) throw ServiceError(409, "trial already submitted");
    const auto& d = ab_pairs_[it->second].descriptor;
    rec.subject_id = s.state.subject_id;
    rec.clip_id = d.image_id;
    rec.shown_emotion = d.shown_emotion;
    rec.is_correct_emotion = d.is_correct_emotion;
    rec.emotion_side = d.emotion_side;
    rec.choice = side == d.emotion_side ? stats::AbChoice::EmotionSide : stats::AbChoice::NeutralSide;
    rec.timestamp = utc_timestamp();
    rec.session_id = session_id;
    rec.trial_id = trial_id;
    append(options_.ab_log, stats::to_json_line(rec));
    s.submitted.insert(trial_id);
    s.state.completed += 1;
  }
  return rec;
}

// ---------------------------------------------------------------------------
// HTTP surface
// ---------------------------------------------------------------------------

namespace {

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& kind = "error") {
  res.status = status;
  res.set_content(json{{"status", kind}, {"error", message}}.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.what(), e.status() == 410 ? "exhausted" : "error");
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed body: ") + e.what());
    } catch (const DomainError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw ServiceError(400, std::string("missing parameter '") + name + "'");
  return req.get_param_value(name);
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ServiceError(400, std::string(what) + " must be a non-negative integer");
  }
}

const char* media_type(const std::string& path) {
  return fs::path(path).extension() == ".png" ? "image/png" : "image/x-portable-pixmap";
}

}  // namespace

void CalibrationService::mount(httplib::Server& server) {
  server.Get("/session/new", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::uint64_t> seed;
    if (req.has_param("seed")) seed = parse_u64(req.get_param_value("seed"), "seed");
    SessionMode mode = SessionMode::Calibration;
    if (req.has_param("mode")) {
      const auto m = req.get_param_value("mode");
      if (m == "ab")
        mode = SessionMode::AbTest;
      else if (m != "calibration")
        throw ServiceError(400, "mode must be 'calibration' or 'ab'");
    }
    res.set_content(to_json(start_session(required_param(req, "subject"), seed, mode)).dump(),
                    "application/json");
  }));

  server.Get("/trial/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto sid = required_param(req, "session");
    if (session(sid).mode == SessionMode::Calibration) {
      const auto t = next_trial(sid);
      res.set_content(json{{"trial_id", t.trial_id},
                           {"image_id", t.image_id},
                           {"target_emotion", std::string(to_string(t.target_emotion))},
                           {"instruction", t.instruction}}
                          .dump(),
                      "application/json");
    } else {
      const auto t = next_ab_trial(sid);
      const auto media = [&](const char* side) {
        return "/ab/media?session=" + sid + "&trial=" + t.trial_id + "&side=" + side;
      };
      res.set_content(json{{"trial_id", t.trial_id},
                           {"clip_id", t.clip_id},
                           {"question", t.question},
                           {"frames", t.frames},
                           {"left", media("left")},
                           {"right", media("right")}}
                          .dump(),
                      "application/json");
    }
  }));

  server.Get("/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto image_id = required_param(req, "image");
    const ControlVector v = parse_alphas(required_param(req, "alphas"));
    const auto quality =
        req.has_param("quality") ? parse_quality(req.get_param_value("quality")) : PreviewQuality::Draft;
    const auto png = preview(image_id, v, quality);
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }));

  server.Get(R"(/images/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto png = neutral_reference(req.matches[1]);
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }));

  server.Get("/ab/media", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Side side;
    try {
      side = parse_side(required_param(req, "side"));
    } catch (const DomainError& e) {
      throw ServiceError(400, e.what());
    }
    const std::size_t frame = req.has_param("frame") ? parse_u64(req.get_param_value("frame"), "frame") : 0;
    const auto sid = required_param(req, "session");
    const auto tid = required_param(req, "trial");
    const auto bytes = ab_media(sid, tid, side, frame);
    // Only PNG and PPM are ever written by make-pairs.
    const bool png = bytes.size() >= 4 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G';
    res.set_content(std::string(bytes.begin(), bytes.end()), png ? "image/png" : media_type(".ppm"));
  }));

  server.Post("/calibration", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    ControlVector v;
    const json& chosen = body.at("chosen");
    if (chosen.is_string()) {
      v = parse_alphas(chosen.get<std::string>());
    } else {
      for (std::size_t i = 0; i < ControlVector::kSize; ++i) {
        const auto& x = chosen.at(std::string(ControlVector::kNames[i]));
        if (!x.is_number()) throw ServiceError(400, "alphas must be numbers");
        v[i] = x.get<double>();
      }
    }
    const auto rec = submit_calibration(body.at("session_id").get<std::string>(),
                                        body.at("trial_id").get<std::string>(), v);
    res.set_content(stats::to_json_line(rec), "application/json");
  }));

  server.Post("/ab-choice", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const auto rec = submit_ab_choice(body.at("session_id").get<std::string>(),
                                      body.at("trial_id").get<std::string>(),
                                      body.at("choice").get<std::string>());
    // The acknowledgment stays blind: no emotion identity goes back to the client.
    res.set_content(json{{"status", "ok"}, {"trial_id", rec.trial_id.value_or("")}}.dump(),
                    "application/json");
  }));

  server.Get("/presets", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(export_presets_text(), "text/plain");
  });
}

}  // namespace moodisp::service
