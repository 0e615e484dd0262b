// Acceptance checks 1-13.  Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "moodisp/inverse_isp.hpp"
#include "moodisp/io.hpp"
#include "moodisp/ops/clahe.hpp"
#include "moodisp/ops/guided_filter.hpp"
#include "moodisp/ops/saturation.hpp"
#include "moodisp/ops/sharpen.hpp"
#include "moodisp/ops/tint.hpp"
#include "moodisp/pipeline.hpp"
#include "moodisp/stats/ab_tally.hpp"
#include "moodisp/stats/anova.hpp"
#include "support/fixtures.hpp"
#include "support/study_fixtures.hpp"

#ifndef MOODISP_CLI_PATH
#error "MOODISP_CLI_PATH must name the CLI binary"
#endif

using namespace moodisp;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

PipelineConfig baseline_zero() {
  PipelineConfig cfg;
  cfg.anchor_to_roi_mean = true;
  cfg.zeta = 0.0;
  cfg.p = 0.0;
  cfg.clahe_clip = 1.0;
  return cfg;
}

// 1 -------------------------------------------------------------------------
Outcome neutral_identity() {
  const Image img = testing::random_image16(1920, 1080, 2024);
  const auto in = quantize_linear16(img);
  const RenderRequest req{&img, {}, baseline_zero(), OutputEncoding::Linear16};
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = std::get<Linear16Image>(render(req));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int worst = 0;
  for (int c = 0; c < 3; ++c)
    worst = std::max(worst, (out.channel(c).cast<int>() - in.channel(c).cast<int>()).abs().maxCoeff());
  return {worst <= 1 && secs < 1.0, fmt("max %.0f LSB, %.3f s on 1920x1080", worst, secs)};
}

// 2 -------------------------------------------------------------------------
Outcome saturation_ceiling() {
  const Image img = testing::random_image(1000, 100, 77);
  const auto lc = rgb_to_lumachroma(img);
  const Plane<double> S = lc.chroma_magnitude();
  long violations = 0;
  double worst = -1;
  for (double a : {0.2, 1.0, 3.0}) {
    const auto out = apply_saturation(lc, a, 1e-6);
    const Plane<double> S2 = out.chroma_magnitude();
    for (Eigen::Index i = 0; i < S.size(); ++i) {
      const double excess = S2(i) - (S(i) + 0.5 * (1.0 - S(i)));
      worst = std::max(worst, excess);
      violations += excess > 1e-6;
    }
  }
  return {violations == 0, fmt("3 x 1e5 samples, %.0f over the ceiling, worst excess %.2e", violations, worst)};
}

// 3 -------------------------------------------------------------------------
Outcome tint_neutral_axis() {
  const auto coeffs = tint_coefficients(0.19, 0.0);
  const bool exact_coeffs = coeffs.m_R == 1.19 && coeffs.m_G == 0.81 && coeffs.m_B == 0.81;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image gray(1000, 100);
  for (Eigen::Index i = 0; i < gray.pixel_count(); ++i) gray.r(i) = gray.g(i) = gray.b(i) = u(rng);
  const Image out = apply_tint(gray, coeffs);
  long changed = 0;
  for (int c = 0; c < 3; ++c) changed += (out.channel(c) != gray.channel(c)).count();
  return {exact_coeffs && changed == 0,
          fmt("coefficients (%.2f, 0.81, 0.81), %.0f of 3e5 samples changed", coeffs.m_R, changed)};
}

// 4 -------------------------------------------------------------------------
Outcome preset_fidelity() {
  struct Row {
    Emotion e;
    double S, B, LC, RG, P, YB;
  };
  const Row table[4] = {{Emotion::Angry, 0.15, -0.08, 0.32, 0.19, 0.7, 0.0},
                        {Emotion::Calm, 0.0, 0.0, 0.0, 0.0, -0.2, 0.0},
                        {Emotion::Happy, 0.2, 0.19, 0.14, 0.0, 0.0, 0.0},
                        {Emotion::Sad, -0.18, -0.09, -0.02, 0.0, 0.0, -0.1}};
  int matched = 0;
  for (const auto& r : table) {
    const auto v = preset_for_emotion(r.e);
    matched += (v.alpha_S == r.S) + (v.alpha_B == r.B) + (v.alpha_LC == r.LC) + (v.alpha_RG == r.RG) +
               (v.alpha_P == r.P) + (v.alpha_YB == r.YB);
  }
  return {matched == 24, fmt("%.0f of %.0f cells exact", matched, 24)};
}

// 5 -------------------------------------------------------------------------
Outcome va_quadrants() {
  bool ok = quadrant_from_va({0.4, 0.7}) == Emotion::Happy && quadrant_from_va({0.4, -0.7}) == Emotion::Calm &&
            quadrant_from_va({-0.4, 0.7}) == Emotion::Angry && quadrant_from_va({-0.4, -0.7}) == Emotion::Sad;
  int rejected = 0;
  for (const VAVector va : {VAVector{0.0, 0.5}, VAVector{0.5, 0.0}, VAVector{0.0, 0.0}, VAVector{-0.0, -0.3}}) {
    try {
      quadrant_from_va(va);
    } catch (const DomainError&) {
      ++rejected;
    }
  }
  ok = ok && rejected == 4;
  return {ok, fmt("4 quadrants mapped, %.0f of 4 border inputs rejected", rejected)};
}

// 6 -------------------------------------------------------------------------
Plane<double> window_mean(const Plane<double>& p, int r) {
  Plane<double> out(p.rows(), p.cols());
  for (Eigen::Index y = 0; y < p.rows(); ++y)
    for (Eigen::Index x = 0; x < p.cols(); ++x) {
      double s = 0;
      int n = 0;
      for (Eigen::Index v = std::max<Eigen::Index>(0, y - r); v <= std::min(p.rows() - 1, y + r); ++v)
        for (Eigen::Index u = std::max<Eigen::Index>(0, x - r); u <= std::min(p.cols() - 1, x + r); ++u) {
          s += p(v, u);
          ++n;
        }
      out(y, x) = s / n;
    }
  return out;
}

Plane<double> sliding_guided(const Plane<double>& I, int r, double eps) {
  const Plane<double> mean = window_mean(I, r);
  Plane<double> a(I.rows(), I.cols()), b(I.rows(), I.cols());
  for (Eigen::Index y = 0; y < I.rows(); ++y)
    for (Eigen::Index x = 0; x < I.cols(); ++x) {
      double var = 0;
      int n = 0;
      for (Eigen::Index v = std::max<Eigen::Index>(0, y - r); v <= std::min(I.rows() - 1, y + r); ++v)
        for (Eigen::Index u = std::max<Eigen::Index>(0, x - r); u <= std::min(I.cols() - 1, x + r); ++u) {
          var += (I(v, u) - mean(y, x)) * (I(v, u) - mean(y, x));
          ++n;
        }
      var /= n;
      a(y, x) = var / (var + eps);
      b(y, x) = (1 - a(y, x)) * mean(y, x);
    }
  return window_mean(a, r) * I + window_mean(b, r);
}

Outcome guided_filter_oracle() {
  const PipelineConfig cfg;
  double worst = 0;
  for (const auto& [r, eps] : {std::pair{cfg.gf_radius, cfg.gf_eps}, std::pair{1, 1e-2}, std::pair{3, 1e-4}}) {
    const Plane<double> I = testing::random_plane(16, 16, 600 + static_cast<std::uint64_t>(r));
    worst = std::max(worst, (guided_filter(I, r, eps) - sliding_guided(I, r, eps)).abs().maxCoeff());
  }
  bool constant_exact = true;
  for (double c : {0.0, 0.25, 0.6180339887, 1.0}) {
    const Plane<double> I = Plane<double>::Constant(16, 16, c);
    constant_exact = constant_exact && (guided_filter(I, cfg.gf_radius, cfg.gf_eps) == c).all();
  }
  return {worst < 1e-5 && constant_exact,
          fmt("max abs diff %.2e, constant planes ", worst) + (constant_exact ? "exact" : "NOT exact")};
}

// 7 -------------------------------------------------------------------------
// Global equalization: the fraction of samples falling in lower bins plus the
// bin's own mass spread linearly across the bin.
Outcome clahe_reduction() {
  const Image chart = testing::test_chart(256, 192);
  Plane<double> Y = rgb_to_lumachroma(chart).y;
  std::vector<double> sorted(Y.data(), Y.data() + Y.size());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const auto equalize = [&](double v) {
    const double lo = std::floor(v * 256.0) / 256.0;
    const double hi = lo + 1.0 / 256.0;
    const double below = std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
    const double in_bin = (std::lower_bound(sorted.begin(), sorted.end(), hi) - sorted.begin()) - below;
    return (below + in_bin * (v - lo) * 256.0) / n;
  };
  const Plane<double> out = clahe(Y, 1, 1, std::numeric_limits<double>::infinity());
  double worst = 0;
  for (Eigen::Index i = 0; i < Y.size(); ++i) worst = std::max(worst, std::abs(out(i) - equalize(Y(i))));
  const double lsb = worst * 255.0;
  return {lsb <= 1.0, fmt("max deviation %.2e LSB over %.0f samples", lsb, n)};
}

// 8 -------------------------------------------------------------------------
Outcome tone_map_directions() {
  const Image chart = testing::test_chart();
  const PipelineConfig cfg;
  const Image neutral = render_linear(chart, {}, cfg);
  const Image happy = render_linear(chart, preset_for_emotion(Emotion::Happy), cfg);
  const Image sad = render_linear(chart, preset_for_emotion(Emotion::Sad), cfg);
  const double yn = testing::mean_luminance(neutral), yh = testing::mean_luminance(happy),
               ys = testing::mean_luminance(sad);
  const double cn = testing::mean_chroma(neutral), cs = testing::mean_chroma(sad);
  return {yh > yn && ys < yn && cs < cn,
          fmt("Y happy/neutral %.4f", yh / yn) + fmt(", Y sad/neutral %.4f", ys / yn) +
              fmt(", C sad/neutral %.4f", cs / cn)};
}

// 9 -------------------------------------------------------------------------
Outcome sharpening() {
  const PipelineConfig cfg;
  const Plane<double> tex = rgb_to_lumachroma(testing::test_chart()).y;
  const bool identity = (sharpen(tex, -cfg.p, cfg) == tex).all();

  PipelineConfig zero = cfg;
  zero.p = 0.0;
  Plane<double> step(8, 64);
  for (Eigen::Index x = 0; x < 64; ++x) step.col(x).setConstant(x < 32 ? 0.0 : 1.0);
  Plane<double> soft(8, 64);
  for (Eigen::Index x = 0; x < 64; ++x) soft.col(x).setConstant(0.2 + 0.6 / (1 + std::exp(-(x - 31.5))));
  const int r = overshoot_window_radius(zero.sigma);
  double worst = 0;
  for (const Plane<double>* in : {&step, &soft}) {
    const Plane<double> out = sharpen(*in, 0.7, zero);
    for (Eigen::Index y = 0; y < in->rows(); ++y)
      for (Eigen::Index x = 0; x < in->cols(); ++x) {
        const Eigen::Index x0 = std::max<Eigen::Index>(0, x - r), x1 = std::min<Eigen::Index>(in->cols() - 1, x + r);
        const Eigen::Index y0 = std::max<Eigen::Index>(0, y - r), y1 = std::min<Eigen::Index>(in->rows() - 1, y + r);
        const auto win = in->block(y0, x0, y1 - y0 + 1, x1 - x0 + 1);
        worst = std::max({worst, out(y, x) - win.maxCoeff(), win.minCoeff() - out(y, x)});
      }
  }
  return {identity && worst <= 1e-12,
          std::string(identity ? "alpha_P = -p exact" : "alpha_P = -p NOT identity") +
              fmt(", worst excursion outside window %.2e", worst)};
}

// 10 ------------------------------------------------------------------------
Srgb8Image photo_fixture() {
  // Smooth sky gradient, saturated objects, deep shadows and fine texture.
  const Eigen::Index w = 640, h = 480;
  Image img(w, h);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> grain(0.0, 0.01);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const double fy = double(y) / h, fx = double(x) / w;
      double r = 0.25 + 0.3 * (1 - fy), g = 0.35 + 0.3 * (1 - fy), b = 0.6 + 0.35 * (1 - fy);
      if (fy > 0.6) {
        const double t = 0.08 + 0.05 * std::sin(fx * 90) * std::cos(fy * 70);
        r = t * 1.1, g = t * 1.3, b = t * 0.6;
      }
      if (std::hypot(fx - 0.3, fy - 0.45) < 0.12) r = 0.8, g = 0.1, b = 0.05;
      if (std::hypot(fx - 0.72, fy - 0.5) < 0.08) r = 0.9, g = 0.85, b = 0.2;
      if (fx > 0.85 && fy > 0.7) r = g = b = 0.002 * (1 + fx);
      img.r(y, x) = std::clamp(r + grain(rng), 0.0, 1.0);
      img.g(y, x) = std::clamp(g + grain(rng), 0.0, 1.0);
      img.b(y, x) = std::clamp(b + grain(rng), 0.0, 1.0);
    }
  return delinearize(img);
}

Outcome inverse_isp() {
  Srgb8Image codes(256, 3);
  for (int c = 0; c < 256; ++c)
    for (int k = 0; k < 3; ++k) {
      codes.r(k, c) = static_cast<std::uint8_t>(c);
      codes.g(k, c) = static_cast<std::uint8_t>((c + 85 * k) % 256);
      codes.b(k, c) = static_cast<std::uint8_t>(255 - c);
    }
  const bool exhaustive = delinearize(linearize(codes)) == codes;

  // Through 16-bit linear storage, as a linearized image is kept on disk.
  const Srgb8Image photo = photo_fixture();
  const Image stored = dequantize_linear16(quantize_linear16(linearize(photo)));
  const double db = psnr(delinearize(stored), photo);
  return {exhaustive && db >= 50.0,
          std::string(exhaustive ? "256 codes exact" : "256-code round trip NOT exact") +
              (std::isinf(db) ? std::string(", photo PSNR inf dB") : fmt(", photo PSNR %.2f dB", db))};
}

// 11 ------------------------------------------------------------------------
double rel(double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

Outcome anova_oracle() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int subjects = 3 + static_cast<int>(seed % 8);  // 3..10
    const auto records = testing::synthetic_calibration(subjects, 1000 + seed);
    for (std::size_t p = 0; p < ControlVector::kSize; ++p) {
      const auto got = stats::rm_anova(records, ControlVector::kNames[p]);
      const auto want = testing::oracle_rm_anova(records, p);
      worst = std::max({worst, rel(got.F, want.F), rel(got.p, want.p), rel(got.eta2, want.eta2)});
    }
  }
  auto constant = testing::synthetic_calibration(6, 5);
  for (auto& r : constant) r.chosen = ControlVector{0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  bool zero_f = true;
  for (const auto& res : stats::rm_anova_all(constant)) zero_f = zero_f && res.F == 0.0;
  const bool labels = stats::effect_size_class(0.42) == stats::EffectSize::Large &&
                      stats::effect_size_class(0.056) == stats::EffectSize::Small;
  return {worst <= 1e-9 && zero_f && labels,
          fmt("20 datasets, worst relative error %.2e", worst) + (zero_f ? ", constant F = 0" : ", constant F != 0") +
              (labels ? ", labels Large/Small" : ", labels wrong")};
}

// 12 ------------------------------------------------------------------------
Outcome ab_tally() {
  const auto t = stats::ab_tally(testing::ab_preference_fixture());
  const bool ok = t.correct.pct_emotion == 87 && t.correct.pct_neutral == 13 && t.wrong.pct_emotion == 24 &&
                  t.wrong.pct_neutral == 76;
  char buf[128];
  std::snprintf(buf, sizeof buf, "correct %d%%/%d%%, wrong %d%%/%d%%", t.correct.pct_emotion, t.correct.pct_neutral,
                t.wrong.pct_emotion, t.wrong.pct_neutral);
  return {ok, buf};
}

// 13 ------------------------------------------------------------------------
int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + MOODISP_CLI_PATH + "' " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `dir`, keyed by relative path.
std::vector<std::pair<std::string, std::string>> tree(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.emplace_back(std::filesystem::relative(e.path(), dir).string(), slurp(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  testing::TempDir dir;
  const auto in = dir.path() / "in";
  std::filesystem::create_directories(in / "clip");
  save_image(testing::test_chart(160, 96), {(in / "still.ppm").string(), ImageFormat::Ppm16});
  save_srgb8(photo_fixture(), {(in / "photo.png").string(), ImageFormat::Png8});
  for (int f = 0; f < 3; ++f)
    save_image(testing::random_image16(64, 48, 50 + f),
               {(in / "clip" / ("f" + std::to_string(f) + ".ppm")).string(), ImageFormat::Ppm16});
  std::ofstream(in / "clips.jsonl") << "{\"clip_id\":\"still\",\"path\":\"still.ppm\",\"valence\":0.5,\"arousal\":0.4}\n"
                                       "{\"clip_id\":\"clip\",\"path\":\"clip\",\"valence\":-0.6,\"arousal\":-0.2}\n"
                                       "{\"clip_id\":\"angry\",\"path\":\"still.ppm\",\"valence\":-0.3,\"arousal\":0.8}\n";
  {
    std::ofstream cal(in / "cal.jsonl");
    for (const auto& r : testing::synthetic_calibration(8, 13)) cal << stats::to_json_line(r) << '\n';
    std::ofstream ab(in / "ab.jsonl");
    for (const auto& r : testing::ab_preference_fixture()) ab << stats::to_json_line(r) << '\n';
  }

  const auto q = [](const std::filesystem::path& p) { return "'" + p.string() + "'"; };
  int failures = 0, commands = 0;
  std::vector<std::pair<std::string, std::string>> runs[2];
  for (int run = 0; run < 2; ++run) {
    const auto out = dir.path() / ("run" + std::to_string(run));
    std::filesystem::create_directories(out);
    const std::vector<std::string> cmds = {
        "render --input " + q(in / "still.ppm") + " --output " + q(out / "happy.ppm") + " --emotion happy",
        "render --input " + q(in / "photo.png") + " --output " + q(out / "angry.png") + " --emotion angry --bit-depth 8",
        "render --input " + q(in / "still.ppm") + " --output " + q(out / "a.png") + " --alphas=0.1,-0.05,0.1,0.2,-0.1,0.3",
        "invert --input " + q(in / "photo.png") + " --output " + q(out / "lin.ppm"),
        "analyze " + q(in / "cal.jsonl") + " --json " + q(out / "anova.json"),
        "abtest tally " + q(in / "ab.jsonl") + " --json " + q(out / "tally.json"),
        "abtest make-pairs --clips " + q(in / "clips.jsonl") + " --out " + q(out / "pairs") + " --seed 42",
        "presets",
    };
    commands = static_cast<int>(cmds.size());
    for (const auto& c : cmds) failures += run_cli(c) != 0;
    runs[run] = tree(out);
  }
  const bool same = runs[0] == runs[1] && !runs[0].empty();
  return {failures == 0 && same, fmt("%.0f commands x 2 runs, %.0f output files", commands, runs[0].size()) +
                                     (same ? ", byte-identical" : ", outputs DIFFER") +
                                     (failures ? ", some commands failed" : "")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"neutral identity", neutral_identity},
      {"saturation ceiling", saturation_ceiling},
      {"tint neutral axis", tint_neutral_axis},
      {"preset fidelity", preset_fidelity},
      {"valence/arousal quadrants", va_quadrants},
      {"guided filter oracle", guided_filter_oracle},
      {"CLAHE reduction", clahe_reduction},
      {"tone-map directions", tone_map_directions},
      {"sharpening", sharpening},
      {"inverse ISP", inverse_isp},
      {"ANOVA oracle", anova_oracle},
      {"A/B tally", ab_tally},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %-26s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
