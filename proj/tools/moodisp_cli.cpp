#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "moodisp/ab_pairs.hpp"
#include "moodisp/inverse_isp.hpp"
#include "moodisp/io.hpp"
#include "moodisp/pipeline.hpp"
#include "moodisp/stats/ab_tally.hpp"
#include "moodisp/stats/anova.hpp"
#include "moodisp/stats/records.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace moodisp;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Bad flags or values discovered after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PipelineConfig config_from(const std::string& path) {
  if (path.empty()) return {};
  try {
    return load_pipeline_config(path);
  } catch (const DomainError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  if (path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  std::string input, output, emotion, alphas, config;
  int bit_depth = 16;
};

void cmd_render(const RenderArgs& a) {
  ControlVector v;
  try {
    v = a.emotion.empty() ? parse_alphas(a.alphas) : preset_for_emotion(parse_emotion(a.emotion));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const PipelineConfig cfg = config_from(a.config);
  const Image img = load_image(a.input);
  RenderRequest req{&img, v, cfg,
                    a.bit_depth == 8 ? OutputEncoding::Srgb8 : OutputEncoding::Linear16};
  save_encoded(render(req), a.output);
}

struct InvertArgs {
  std::string input, output;
  std::optional<double> gamma;
};

void cmd_invert(const InvertArgs& a) {
  InverseConfig cfg = a.gamma ? InverseConfig::pure_gamma(*a.gamma) : InverseConfig::srgb();
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const Image linear = linearize(load_srgb8(a.input), cfg);
  save_image(linear, {a.output, format_for_path(a.output, 16)});
}

struct AnalyzeArgs {
  std::string records, json_out, missing = "reject";
};

void cmd_analyze(const AnalyzeArgs& a) {
  stats::MissingCells missing;
  if (a.missing == "impute")
    missing = stats::MissingCells::ImputeEmotionMean;
  else if (a.missing == "reject")
    missing = stats::MissingCells::Reject;
  else
    throw UsageError("--missing must be 'impute' or 'reject'");

  const auto records = stats::load_calibration_records(a.records);
  if (records.empty()) throw InsufficientDataError("'" + a.records + "' contains no records");
  const auto anova = stats::rm_anova_all(records, missing);
  const auto presets = stats::calibrate_presets(records);
  std::cout << stats::format_anova_table(anova) << '\n' << stats::format_preset_table(presets);

  if (!a.json_out.empty()) {
    json j;
    j["records"] = records.size();
    j["anova"] = json::array();
    for (const auto& r : anova) {
      j["anova"].push_back({{"parameter", r.parameter},
                            {"F", r.F},
                            {"p", r.p},
                            {"eta2", r.eta2},
                            {"effect", std::string(stats::to_string(r.label))},
                            {"df_emotion", r.df_emotion},
                            {"df_error", r.df_error},
                            {"subjects", r.subjects}});
    }
    j["presets"] = json::object();
    for (const auto& p : presets) {
      json row = json::object();
      for (std::size_t i = 0; i < ControlVector::kSize; ++i)
        row[std::string(ControlVector::kNames[i])] = p.vector[i];
      j["presets"][std::string(to_string(p.emotion))] = row;
    }
    write_json(j, a.json_out);
  }
}

struct MakePairsArgs {
  std::string clips, out, config;
  std::uint64_t seed = 0;
  bool include_calm = false;
};

// Clip list: one JSON object per line with clip_id, path, valence, arousal.
// Paths are relative to the list's directory; a path may name a directory of
// frames, which are processed in lexicographic order.
std::vector<AbClip> read_clips(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open clip list '" + path + "'");
  const fs::path base = fs::path(path).parent_path();
  std::vector<AbClip> clips;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      clips.push_back({j.at("clip_id").get<std::string>(),
                       (base / j.at("path").get<std::string>()).string(),
                       {j.at("valence").get<double>(), j.at("arousal").get<double>()}});
    } catch (const json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return clips;
}

std::vector<fs::path> frames_of(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> frames;
  for (const auto& e : fs::directory_iterator(p))
    if (e.is_regular_file()) frames.push_back(e.path());
  std::sort(frames.begin(), frames.end());
  if (frames.empty()) throw IoError("frame directory '" + p.string() + "' is empty");
  return frames;
}

void cmd_make_pairs(const MakePairsArgs& a) {
  const PipelineConfig cfg = config_from(a.config);
  const auto plans = plan_ab_trials(read_clips(a.clips), a.seed, a.include_calm);
  const fs::path out(a.out);
  fs::create_directories(out);

  std::seed_seq seq{a.seed, std::uint64_t{1}};
  std::mt19937_64 rng(seq);
  std::ofstream desc(out / "pairs.jsonl");
  if (!desc) throw IoError("cannot write '" + (out / "pairs.jsonl").string() + "'");

  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& plan = plans[i];
    char id[16];
    std::snprintf(id, sizeof id, "p%04zu", i + 1);
    const auto frames = frames_of(plan.path);
    const bool video = fs::is_directory(plan.path);
    const fs::path left = video ? fs::path(std::string(id) + "_left") : fs::path(std::string(id) + "_left.png");
    const fs::path right = video ? fs::path(std::string(id) + "_right") : fs::path(std::string(id) + "_right.png");
    if (video) {
      fs::create_directories(out / left);
      fs::create_directories(out / right);
    }

    // Every frame of a clip shares the side placement of the first.
    const std::mt19937_64 start = rng;
    AbTrialDescriptor descriptor;
    for (const auto& frame : frames) {
      std::mt19937_64 r = start;
      const AbPair pair = render_ab_pair(load_image(frame.string()), plan.clip_id, plan.correct,
                                         plan.wrong, plan.show_correct, cfg, r);
      descriptor = pair.descriptor;
      const auto name = frame.stem().string() + ".png";
      save_image(pair.left, {(out / (video ? left / name : left)).string(), ImageFormat::Png8});
      save_image(pair.right, {(out / (video ? right / name : right)).string(), ImageFormat::Png8});
    }
    rng.discard(1);

    desc << json{{"pair_id", id},
                 {"clip_id", plan.clip_id},
                 {"correct_emotion", std::string(to_string(plan.correct))},
                 {"shown_emotion", std::string(to_string(descriptor.shown_emotion))},
                 {"is_correct_emotion", descriptor.is_correct_emotion},
                 {"emotion_side", std::string(to_string(descriptor.emotion_side))},
                 {"left", left.string()},
                 {"right", right.string()}}
                .dump()
         << '\n';
  }
  desc.flush();
  if (!desc) throw IoError("write failed for pairs descriptor");
}

struct TallyArgs {
  std::string records, json_out;
  bool allow_calm = false;
};

void cmd_tally(const TallyArgs& a) {
  const auto t = stats::ab_tally(stats::load_ab_records(a.records, a.allow_calm));
  std::cout << stats::format_ab_tally(t);
  if (!a.json_out.empty()) {
    const auto row = [](const stats::AbTallyRow& r) {
      return json{{"trials", r.trials},
                  {"prefer_emotion", r.prefer_emotion},
                  {"prefer_neutral", r.prefer_neutral},
                  {"pct_emotion", r.pct_emotion},
                  {"pct_neutral", r.pct_neutral},
                  {"p_value", r.p_value}};
    };
    write_json({{"correct", row(t.correct)}, {"wrong", row(t.wrong)}}, a.json_out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-controlled rendering and study analysis"};
  app.require_subcommand(1);

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render an image with an emotion preset or explicit alphas");
  render->add_option("--input", render_args.input, "Input image (16-bit linear or 8-bit sRGB)")->required();
  render->add_option("--output", render_args.output, "Output image (.ppm or .png)")->required();
  auto* emotion = render->add_option("--emotion", render_args.emotion, "happy|calm|angry|sad|neutral");
  auto* alphas = render->add_option("--alphas", render_args.alphas, "S,YB,RG,LC,B,P");
  emotion->excludes(alphas);
  render->add_option("--config", render_args.config, "Pipeline config file")->check(CLI::ExistingFile);
  render->add_option("--bit-depth", render_args.bit_depth, "Output bit depth")->check(CLI::IsMember({8, 16}));
  render->callback([&] {
    if (render_args.emotion.empty() && render_args.alphas.empty())
      throw CLI::RequiredError("--emotion or --alphas");
  });

  InvertArgs invert_args;
  auto* invert = app.add_subcommand("invert", "Linearize an 8-bit display-referred image");
  invert->add_option("--input", invert_args.input, "8-bit input")->required();
  invert->add_option("--output", invert_args.output, "16-bit linear output (.ppm or .png)")->required();
  auto* gamma = invert->add_option("--gamma", invert_args.gamma, "Pure power-law exponent");
  invert->add_flag("--srgb", "Piecewise sRGB transfer (default)")->excludes(gamma);

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Repeated-measures ANOVA and preset calibration");
  analyze->add_option("records", analyze_args.records, "Calibration record file")->required();
  analyze->add_option("--json", analyze_args.json_out, "Also write the results as JSON ('-' for stdout)");
  analyze->add_option("--missing", analyze_args.missing, "Missing subject/emotion cells: impute|reject");

  auto* abtest = app.add_subcommand("abtest", "A/B preference study");
  abtest->require_subcommand(1);
  MakePairsArgs pairs_args;
  auto* make_pairs = abtest->add_subcommand("make-pairs", "Render neutral/emotion pairs for a clip list");
  make_pairs->add_option("--clips", pairs_args.clips, "Clip list (JSON lines)")->required()->check(CLI::ExistingFile);
  make_pairs->add_option("--out", pairs_args.out, "Output directory")->required();
  make_pairs->add_option("--seed", pairs_args.seed, "Assignment seed")->required();
  make_pairs->add_option("--config", pairs_args.config, "Pipeline config file")->check(CLI::ExistingFile);
  make_pairs->add_flag("--include-calm", pairs_args.include_calm, "Keep Calm clips and allow Calm as the wrong emotion");
  TallyArgs tally_args;
  auto* tally = abtest->add_subcommand("tally", "Preference tally with binomial tests");
  tally->add_option("records", tally_args.records, "A/B record file")->required();
  tally->add_option("--json", tally_args.json_out, "Also write the tally as JSON ('-' for stdout)");
  tally->add_flag("--allow-calm", tally_args.allow_calm, "Accept records that showed Calm");

  auto* presets = app.add_subcommand("presets", "Print the shipped emotion presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*render) cmd_render(render_args);
    else if (*invert) cmd_invert(invert_args);
    else if (*analyze) cmd_analyze(analyze_args);
    else if (*make_pairs) cmd_make_pairs(pairs_args);
    else if (*tally) cmd_tally(tally_args);
    else if (*presets) std::cout << export_presets_text();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cerr << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
