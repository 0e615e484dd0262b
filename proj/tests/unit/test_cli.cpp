#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "moodisp/inverse_isp.hpp"
#include "moodisp/io.hpp"
#include "moodisp/pipeline.hpp"
#include "moodisp/stats/records.hpp"
#include "support/fixtures.hpp"
#include "support/study_fixtures.hpp"

#ifndef MOODISP_CLI_PATH
#error "MOODISP_CLI_PATH must name the CLI binary"
#endif

using namespace moodisp;
using moodisp::testing::TempDir;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
  const std::string cmd = std::string("'") + MOODISP_CLI_PATH + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string q(const std::string& s) { return "'" + s + "'"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename R>
void write_records(const std::string& path, const std::vector<R>& records) {
  std::ofstream out(path);
  for (const auto& r : records) out << stats::to_json_line(r) << '\n';
}

constexpr const char* kBaselineZero = "T = roi_mean\nzeta = 0\np = 0\nclahe_clip = 1\n";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  TempDir dir;
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("render --input x.ppm").code == 2);
  CHECK(cli("render --input x.ppm --output y.ppm").code == 2);
  CHECK(cli("render --input x.ppm --output y.ppm --emotion happy --alphas 0,0,0,0,0,0").code == 2);
  CHECK(cli("render --input x.ppm --output y.ppm --bogus").code == 2);
  CHECK(cli("render --input x.ppm --output y.ppm --bit-depth 12 --emotion sad").code == 2);
  CHECK(cli("analyze").code == 2);
  CHECK(cli("abtest").code == 2);

  save_image(testing::random_image(8, 8, 1), {dir.file("in.ppm"), ImageFormat::Ppm16});
  const auto base = "render --input " + q(dir.file("in.ppm")) + " --output " + q(dir.file("o.ppm"));
  CHECK(cli(base + " --alphas 0,0,0,0,0").code == 2);
  CHECK(cli(base + " --alphas 0,0,nan,0,0,0").code == 2);
  CHECK(cli(base + " --emotion joyful").code == 2);
  write_text(dir.file("bad.cfg"), "sigma = -1\n");
  const auto r = cli(base + " --emotion sad --config " + q(dir.file("bad.cfg")));
  CHECK(r.code == 2);
  CHECK(r.out.find("sigma") != std::string::npos);
  write_text(dir.file("unknown.cfg"), "colour = 3\n");
  CHECK(cli(base + " --emotion sad --config " + q(dir.file("unknown.cfg"))).code == 2);

  write_text(dir.file("recs.jsonl"), "");
  CHECK(cli("analyze " + q(dir.file("recs.jsonl")) + " --missing sometimes").code == 2);
}

TEST_CASE("runtime errors exit with 1") {
  TempDir dir;
  CHECK(cli("render --input " + q(dir.file("missing.ppm")) + " --output " + q(dir.file("o.ppm")) +
            " --emotion happy")
            .code == 1);
  write_text(dir.file("empty.jsonl"), "\n");
  const auto r = cli("analyze " + q(dir.file("empty.jsonl")));
  CHECK(r.code == 1);
  CHECK(r.out.find("no records") != std::string::npos);
  write_text(dir.file("broken.jsonl"), "{\"subject_id\": 3}\n");
  CHECK(cli("analyze " + q(dir.file("broken.jsonl"))).code == 1);

  save_image(testing::random_image(8, 8, 1), {dir.file("lin.ppm"), ImageFormat::Ppm16});
  CHECK(cli("invert --input " + q(dir.file("lin.ppm")) + " --output " + q(dir.file("o.ppm"))).code == 1);
}

TEST_CASE("render") {
  TempDir dir;
  const Image img = testing::random_image16(64, 48, 11);
  save_image(img, {dir.file("in.ppm"), ImageFormat::Ppm16});
  write_text(dir.file("zero.cfg"), kBaselineZero);

  REQUIRE(cli("render --input " + q(dir.file("in.ppm")) + " --output " + q(dir.file("n.ppm")) +
              " --emotion neutral --config " + q(dir.file("zero.cfg")))
              .code == 0);
  const auto in = quantize_linear16(img);
  const auto out = load_linear16(dir.file("n.ppm"));
  for (int c = 0; c < 3; ++c)
    CHECK((out.channel(c).cast<int>() - in.channel(c).cast<int>()).abs().maxCoeff() <= 1);

  REQUIRE(cli("render --input " + q(dir.file("in.ppm")) + " --output " + q(dir.file("sad.ppm")) +
              " --emotion sad")
              .code == 0);
  const auto sad = preset_for_emotion(Emotion::Sad);
  std::ostringstream alphas;
  for (std::size_t i = 0; i < ControlVector::kSize; ++i) alphas << (i ? "," : "") << sad[i];
  REQUIRE(cli("render --input " + q(dir.file("in.ppm")) + " --output " + q(dir.file("sad2.ppm")) +
              " --alphas=" + alphas.str())
              .code == 0);
  CHECK(read_bytes(dir.file("sad.ppm")) == read_bytes(dir.file("sad2.ppm")));
  CHECK(load_linear16(dir.file("sad.ppm")) ==
        std::get<Linear16Image>(render({&img, sad, {}, OutputEncoding::Linear16})));

  REQUIRE(cli("render --input " + q(dir.file("in.ppm")) + " --output " + q(dir.file("h.png")) +
              " --emotion happy --bit-depth 8")
              .code == 0);
  CHECK(detect_format(dir.file("h.png")) == ImageFormat::Png8);
  CHECK(load_srgb8(dir.file("h.png")) ==
        std::get<Srgb8Image>(render({&img, preset_for_emotion(Emotion::Happy), {}, OutputEncoding::Srgb8})));
}

TEST_CASE("invert") {
  TempDir dir;
  const Srgb8Image codes = delinearize(testing::random_image(40, 30, 4));
  save_srgb8(codes, {dir.file("in.png"), ImageFormat::Png8});
  REQUIRE(cli("invert --input " + q(dir.file("in.png")) + " --output " + q(dir.file("lin.ppm"))).code == 0);
  CHECK(delinearize(load_image(dir.file("lin.ppm"))) == codes);
  REQUIRE(cli("invert --gamma 2.2 --input " + q(dir.file("in.png")) + " --output " + q(dir.file("g.png"))).code ==
          0);
  // Code 1 under gamma 2.2 lies below half a 16-bit step, so compare stored codes.
  CHECK(load_linear16(dir.file("g.png")) == quantize_linear16(linearize(codes, InverseConfig::pure_gamma(2.2))));
  CHECK(cli("invert --gamma 2.2 --srgb --input " + q(dir.file("in.png")) + " --output " + q(dir.file("x.ppm")))
            .code == 2);
  CHECK(cli("invert --gamma -1 --input " + q(dir.file("in.png")) + " --output " + q(dir.file("x.ppm"))).code == 2);
}

TEST_CASE("analyze") {
  TempDir dir;
  const auto records = testing::synthetic_calibration(12, 99);
  write_records(dir.file("cal.jsonl"), records);
  const auto r = cli("analyze " + q(dir.file("cal.jsonl")) + " --json " + q(dir.file("out.json")));
  REQUIRE(r.code == 0);
  for (const char* name : {"alpha_S", "alpha_YB", "alpha_RG", "alpha_LC", "alpha_B", "alpha_P", "happy", "sad"})
    CHECK(r.out.find(name) != std::string::npos);

  std::ifstream in(dir.file("out.json"));
  const json j = json::parse(in);
  CHECK(j.at("records") == records.size());
  REQUIRE(j.at("anova").size() == 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto o = testing::oracle_rm_anova(records, i);
    CHECK(j["anova"][i].at("F").get<double>() == doctest::Approx(o.F).epsilon(1e-9));
    CHECK(j["anova"][i].at("p").get<double>() == doctest::Approx(o.p).epsilon(1e-6));
    CHECK(j["anova"][i].at("df_error") == 33);
  }

  // Identical vectors for every emotion: no emotion effect at all.
  std::vector<stats::CalibrationRecord> flat;
  for (int s = 0; s < 4; ++s)
    for (Emotion e : kStudyEmotions) {
      stats::CalibrationRecord rec;
      rec.subject_id = "s" + std::to_string(s);
      rec.image_id = "img";
      rec.target_emotion = e;
      rec.chosen = ControlVector{0.1 * s, 0, 0, 0, 0, 0};
      rec.chosen.alpha_B = 0.05 * ((s * 7 + static_cast<int>(e)) % 5);
      rec.timestamp = "2024-01-01T00:00:00Z";
      flat.push_back(rec);
    }
  write_records(dir.file("flat.jsonl"), flat);
  const auto f = cli("analyze " + q(dir.file("flat.jsonl")) + " --json -");
  REQUIRE(f.code == 0);
  const json fj = json::parse(f.out.substr(f.out.find("{\n")));
  CHECK(fj["anova"][0].at("F").get<double>() == 0.0);
  CHECK(fj["anova"][0].at("p").get<double>() == 1.0);

  // A subject missing an emotion: rejected by default, accepted when imputing.
  auto partial = records;
  partial.erase(std::remove_if(partial.begin(), partial.end(),
                               [](const auto& rec) {
                                 return rec.subject_id == "sub3" && rec.target_emotion == Emotion::Sad;
                               }),
                partial.end());
  write_records(dir.file("partial.jsonl"), partial);
  CHECK(cli("analyze " + q(dir.file("partial.jsonl"))).code == 1);
  CHECK(cli("analyze --missing impute " + q(dir.file("partial.jsonl"))).code == 0);
}

TEST_CASE("abtest tally") {
  TempDir dir;
  write_records(dir.file("ab.jsonl"), testing::ab_preference_fixture());
  const auto r = cli("abtest tally " + q(dir.file("ab.jsonl")) + " --json " + q(dir.file("t.json")));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("87%") != std::string::npos);
  CHECK(r.out.find("13%") != std::string::npos);
  CHECK(r.out.find("24%") != std::string::npos);
  CHECK(r.out.find("76%") != std::string::npos);
  std::ifstream in(dir.file("t.json"));
  const json j = json::parse(in);
  CHECK(j["correct"].at("pct_emotion") == 87);
  CHECK(j["wrong"].at("pct_emotion") == 24);
  CHECK(j["correct"].at("p_value").get<double>() == doctest::Approx(testing::oracle_binomial_p(167, 192)));
  CHECK(j["wrong"].at("p_value").get<double>() == doctest::Approx(testing::oracle_binomial_p(46, 192)));

  auto calm = testing::ab_preference_fixture();
  calm[0].shown_emotion = Emotion::Calm;
  write_records(dir.file("calm.jsonl"), calm);
  CHECK(cli("abtest tally " + q(dir.file("calm.jsonl"))).code == 1);
  CHECK(cli("abtest tally --allow-calm " + q(dir.file("calm.jsonl"))).code == 0);
}

TEST_CASE("abtest make-pairs") {
  TempDir dir;
  std::filesystem::create_directories(dir.path() / "clips" / "walk");
  save_image(testing::test_chart(48, 32), {dir.file("clips/a.ppm"), ImageFormat::Ppm16});
  save_image(testing::random_image16(24, 16, 2), {dir.file("clips/b.ppm"), ImageFormat::Ppm16});
  for (int f = 0; f < 3; ++f)
    save_image(testing::random_image16(24, 16, 10 + f),
               {dir.file("clips/walk/f" + std::to_string(f) + ".ppm"), ImageFormat::Ppm16});
  write_text(dir.file("clips/list.jsonl"),
             "{\"clip_id\":\"a\",\"path\":\"a.ppm\",\"valence\":0.4,\"arousal\":0.6}\n"
             "{\"clip_id\":\"b\",\"path\":\"b.ppm\",\"valence\":0.4,\"arousal\":-0.3}\n"
             "{\"clip_id\":\"walk\",\"path\":\"walk\",\"valence\":-0.5,\"arousal\":0.5}\n");

  const auto make = [&](const std::string& out, int seed) {
    return cli("abtest make-pairs --clips " + q(dir.file("clips/list.jsonl")) + " --out " + q(dir.file(out)) +
               " --seed " + std::to_string(seed));
  };
  REQUIRE(make("o1", 7).code == 0);
  REQUIRE(make("o2", 7).code == 0);
  CHECK(read_bytes(dir.file("o1/pairs.jsonl")) == read_bytes(dir.file("o2/pairs.jsonl")));
  for (const char* f : {"p0001_left.png", "p0001_right.png", "p0002_left/f0.png", "p0002_right/f2.png"})
    CHECK(read_bytes(dir.file(std::string("o1/") + f)) == read_bytes(dir.file(std::string("o2/") + f)));

  std::ifstream desc(dir.file("o1/pairs.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(desc, line)) {
    const json j = json::parse(line);
    ++n;
    CHECK(j.at("shown_emotion") != "calm");
    CHECK(j.at("shown_emotion") != "neutral");
    CHECK((j.at("shown_emotion") == j.at("correct_emotion")) == j.at("is_correct_emotion").get<bool>());
    // The emotion side carries the render; the other side is the neutral one.
    const std::string neutral_side = j.at("emotion_side") == "left" ? "right" : "left";
    if (j.at("clip_id") == "a") {
      const Image src = load_image(dir.file("clips/a.ppm"));
      CHECK(load_srgb8(dir.file("o1/" + j.at(neutral_side).get<std::string>())) ==
            delinearize(render_linear(src, {}, {})));
    }
  }
  CHECK(n == 2);  // the Calm clip is dropped

  // All frames of a clip share one side assignment and one emotion.
  CHECK(std::filesystem::exists(dir.file("o1/p0002_left/f0.png")));
  CHECK(std::filesystem::exists(dir.file("o1/p0002_right/f2.png")));

  write_text(dir.file("clips/border.jsonl"), "{\"clip_id\":\"edge\",\"path\":\"a.ppm\",\"valence\":0,\"arousal\":0.5}\n");
  const auto b = cli("abtest make-pairs --clips " + q(dir.file("clips/border.jsonl")) + " --out " +
                     q(dir.file("o3")) + " --seed 1");
  CHECK(b.code == 1);
  CHECK(b.out.find("edge") != std::string::npos);
}

TEST_CASE("presets") {
  const auto r = cli("presets");
  REQUIRE(r.code == 0);
  CHECK(parse_presets_text(r.out) == shipped_presets());
}
