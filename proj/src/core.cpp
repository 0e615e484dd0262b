#include "moodisp/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace moodisp {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  std::string v(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw DomainError("'" + std::string(key) + "' expects a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(out))
    throw DomainError("'" + std::string(key) + "' expects a number, got '" + v + "'");
  return out;
}

int parse_int(std::string_view key, std::string_view value) {
  int out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw DomainError("config: '" + std::string(key) + "' expects an integer, got '" +
                      std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const auto v = lower(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DomainError("config: '" + std::string(key) + "' expects a boolean");
}

}  // namespace

double& ControlVector::operator[](std::size_t i) {
  switch (i) {
    case 0: return alpha_S;
    case 1: return alpha_YB;
    case 2: return alpha_RG;
    case 3: return alpha_LC;
    case 4: return alpha_B;
    case 5: return alpha_P;
  }
  throw DomainError("control vector index out of range");
}

double ControlVector::operator[](std::size_t i) const {
  return const_cast<ControlVector&>(*this)[i];
}

bool ControlVector::is_finite() const {
  const auto a = to_array();
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

bool ControlVector::is_zero() const {
  const auto a = to_array();
  return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

ControlVector parse_alphas(std::string_view text) {
  std::array<double, ControlVector::kSize> values{};
  std::size_t count = 0;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto token = trim(rest.substr(0, comma));
    if (count == ControlVector::kSize)
      throw DomainError("alphas: expected 6 comma-separated values (S,YB,RG,LC,B,P)");
    values[count++] = parse_double("alphas", token);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  if (count != ControlVector::kSize)
    throw DomainError("alphas: expected 6 comma-separated values (S,YB,RG,LC,B,P), got " +
                      std::to_string(count));
  return ControlVector::from_array(values);
}

std::string format_alphas(const ControlVector& v) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < ControlVector::kSize; ++i) out << (i ? "," : "") << v[i];
  return out.str();
}

std::size_t alpha_index(std::string_view name) {
  for (std::size_t i = 0; i < ControlVector::kSize; ++i) {
    const auto full = ControlVector::kNames[i];
    if (name == full || name == full.substr(6)) return i;
  }
  throw DomainError("unknown control parameter '" + std::string(name) + "'");
}

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::Happy: return "happy";
    case Emotion::Calm: return "calm";
    case Emotion::Angry: return "angry";
    case Emotion::Sad: return "sad";
    case Emotion::Neutral: return "neutral";
  }
  return "neutral";
}

Emotion parse_emotion(std::string_view name) {
  const auto n = lower(name);
  for (auto e : {Emotion::Happy, Emotion::Calm, Emotion::Angry, Emotion::Sad, Emotion::Neutral})
    if (n == to_string(e)) return e;
  throw DomainError("unknown emotion '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  if (!(eps > 0)) throw DomainError("config: eps must be > 0");
  if (!(T > 0 && T < 1)) throw DomainError("config: T must lie in (0, 1)");
  if (!std::isfinite(zeta) || !std::isfinite(p)) throw DomainError("config: zeta/p must be finite");
  if (!(sigma > 0)) throw DomainError("config: sigma must be > 0");
  if (gf_radius < 1) throw DomainError("config: gf_radius must be >= 1");
  if (!(gf_eps > 0)) throw DomainError("config: gf_eps must be > 0");
  if (clahe_tiles_x < 1 || clahe_tiles_y < 1) throw DomainError("config: clahe_tiles must be >= 1");
  if (!(clahe_clip >= 1)) throw DomainError("config: clahe_clip must be >= 1");
  if (!(overshoot_margin >= 0)) throw DomainError("config: overshoot_margin must be >= 0");
  if (roi && (roi->width < 1 || roi->height < 1 || roi->x < 0 || roi->y < 0))
    throw DomainError("config: roi must have positive size and non-negative origin");
}

PipelineConfig parse_pipeline_config(std::string_view text, PipelineConfig cfg) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw DomainError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (key == "eps") {
      cfg.eps = parse_double(key, value);
    } else if (key == "T") {
      if (lower(value) == "roi_mean") {
        cfg.anchor_to_roi_mean = true;
      } else {
        cfg.anchor_to_roi_mean = false;
        cfg.T = parse_double(key, value);
      }
    } else if (key == "anchor_to_roi_mean") {
      cfg.anchor_to_roi_mean = parse_bool(key, value);
    } else if (key == "zeta") {
      cfg.zeta = parse_double(key, value);
    } else if (key == "p") {
      cfg.p = parse_double(key, value);
    } else if (key == "sigma") {
      cfg.sigma = parse_double(key, value);
    } else if (key == "gf_radius") {
      cfg.gf_radius = parse_int(key, value);
    } else if (key == "gf_eps") {
      cfg.gf_eps = parse_double(key, value);
    } else if (key == "clahe_tiles") {
      // "8" or "8x6"
      const auto x = value.find_first_of("xX");
      if (x == std::string_view::npos) {
        cfg.clahe_tiles_x = cfg.clahe_tiles_y = parse_int(key, value);
      } else {
        cfg.clahe_tiles_x = parse_int(key, trim(value.substr(0, x)));
        cfg.clahe_tiles_y = parse_int(key, trim(value.substr(x + 1)));
      }
    } else if (key == "clahe_clip") {
      cfg.clahe_clip = parse_double(key, value);
    } else if (key == "overshoot_margin") {
      cfg.overshoot_margin = parse_double(key, value);
    } else if (key == "roi") {
      if (lower(value) == "full") {
        cfg.roi.reset();
        continue;
      }
      std::array<int, 4> v{};
      std::string_view rest = value;
      for (int i = 0; i < 4; ++i) {
        const auto comma = rest.find(',');
        if ((comma == std::string_view::npos) != (i == 3))
          throw DomainError("config: roi expects 'x,y,width,height'");
        v[i] = parse_int(key, trim(rest.substr(0, comma)));
        if (comma != std::string_view::npos) rest = rest.substr(comma + 1);
      }
      cfg.roi = Roi{v[0], v[1], v[2], v[3]};
    } else {
      throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" +
                        std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pipeline_config(ss.str(), base);
}

std::string format_pipeline_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "eps = " << cfg.eps << '\n';
  if (cfg.anchor_to_roi_mean)
    out << "T = roi_mean\n";
  else
    out << "T = " << cfg.T << '\n';
  out << "zeta = " << cfg.zeta << '\n'
      << "p = " << cfg.p << '\n'
      << "sigma = " << cfg.sigma << '\n'
      << "gf_radius = " << cfg.gf_radius << '\n'
      << "gf_eps = " << cfg.gf_eps << '\n'
      << "clahe_tiles = " << cfg.clahe_tiles_x << 'x' << cfg.clahe_tiles_y << '\n'
      << "clahe_clip = " << cfg.clahe_clip << '\n'
      << "overshoot_margin = " << cfg.overshoot_margin << '\n';
  if (cfg.roi)
    out << "roi = " << cfg.roi->x << ',' << cfg.roi->y << ',' << cfg.roi->width << ','
        << cfg.roi->height << '\n';
  else
    out << "roi = full\n";
  return out.str();
}

}  // namespace moodisp
