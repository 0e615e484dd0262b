#include "moodisp/stats/anova.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "moodisp/stats/distributions.hpp"

namespace moodisp::stats {

std::string_view to_string(EffectSize e) {
  switch (e) {
    case EffectSize::Small: return "Small";
    case EffectSize::Medium: return "Medium";
    case EffectSize::Large: return "Large";
  }
  return "Small";
}

EffectSize effect_size_class(double eta2) {
  if (!(eta2 >= 0.0 && eta2 <= 1.0)) throw DomainError("effect size must lie in [0, 1]");
  if (eta2 < 0.06) return EffectSize::Small;
  if (eta2 < 0.14) return EffectSize::Medium;
  return EffectSize::Large;
}

AnovaResult rm_anova(const std::vector<CalibrationRecord>& records, std::string_view parameter,
                     MissingCells missing) {
  const std::size_t param = alpha_index(parameter);

  // subject -> emotion -> (sum, count)
  std::map<std::string, std::map<Emotion, std::pair<double, int>>> raw;
  std::set<Emotion> level_set;
  for (const auto& r : records) {
    r.validate();
    auto& cell = raw[r.subject_id][r.target_emotion];
    cell.first += r.chosen[param];
    cell.second += 1;
    level_set.insert(r.target_emotion);
  }
  const std::vector<Emotion> levels(level_set.begin(), level_set.end());
  const int n = static_cast<int>(raw.size());
  const int k = static_cast<int>(levels.size());
  if (n < 2) throw InsufficientDataError("repeated-measures ANOVA needs >= 2 subjects");
  if (k < 2) throw InsufficientDataError("repeated-measures ANOVA needs >= 2 emotion levels");

  Eigen::MatrixXd cells(n, k);  // rows: subjects, cols: emotions
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> present(n, k);
  int s = 0;
  for (const auto& [subject, by_emotion] : raw) {
    for (int e = 0; e < k; ++e) {
      const auto it = by_emotion.find(levels[e]);
      present(s, e) = it != by_emotion.end();
      cells(s, e) = present(s, e) ? it->second.first / it->second.second : 0.0;
      if (!present(s, e) && missing == MissingCells::Reject)
        throw InsufficientDataError("subject '" + subject + "' has no record for emotion '" +
                                    std::string(to_string(levels[e])) + "'");
    }
    ++s;
  }
  if (missing == MissingCells::ImputeEmotionMean) {
    for (int e = 0; e < k; ++e) {
      double sum = 0.0;
      int count = 0;
      for (int i = 0; i < n; ++i)
        if (present(i, e)) {
          sum += cells(i, e);
          ++count;
        }
      if (count == 0) throw InsufficientDataError("emotion level without any record");
      for (int i = 0; i < n; ++i)
        if (!present(i, e)) cells(i, e) = sum / count;
    }
  }

  const double grand = cells.mean();
  const Eigen::RowVectorXd emotion_means = cells.colwise().mean();
  const Eigen::VectorXd subject_means = cells.rowwise().mean();

  AnovaResult res;
  res.parameter = std::string(ControlVector::kNames[param]);
  res.subjects = n;
  res.levels = k;
  res.df_emotion = k - 1;
  res.df_error = (k - 1) * (n - 1);
  // Pairwise form of n * sum_e (mean_e - grand)^2; exactly zero when every
  // emotion mean is equal.
  double pairwise = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) pairwise += std::pow(emotion_means(a) - emotion_means(b), 2);
  res.ss_emotion = n * pairwise / k;
  res.ss_subject = k * (subject_means.array() - grand).square().sum();
  const Eigen::MatrixXd residual =
      (cells.rowwise() - emotion_means).colwise() - subject_means + Eigen::MatrixXd::Constant(n, k, grand);
  res.ss_error = residual.array().square().sum();

  if (res.ss_emotion == 0.0) {
    res.F = 0.0;
    res.p = 1.0;
    res.eta2 = 0.0;
  } else if (res.ss_error == 0.0) {
    res.F = std::numeric_limits<double>::infinity();
    res.p = 0.0;
    res.eta2 = 1.0;
  } else {
    res.F = (res.ss_emotion / res.df_emotion) / (res.ss_error / res.df_error);
    res.p = f_survival(res.F, res.df_emotion, res.df_error);
    res.eta2 = res.ss_emotion / (res.ss_emotion + res.ss_error);
  }
  res.label = effect_size_class(res.eta2);
  return res;
}

std::vector<AnovaResult> rm_anova_all(const std::vector<CalibrationRecord>& records,
                                      MissingCells missing) {
  std::vector<AnovaResult> out;
  for (const auto name : ControlVector::kNames) out.push_back(rm_anova(records, name, missing));
  return out;
}

std::vector<EmotionPreset> calibrate_presets(const std::vector<CalibrationRecord>& records) {
  std::vector<EmotionPreset> out;
  for (const Emotion e : kStudyEmotions) {
    // subject -> (alpha sums, count)
    std::map<std::string, std::pair<std::array<double, ControlVector::kSize>, int>> per_subject;
    for (const auto& r : records) {
      if (r.target_emotion != e) continue;
      r.validate();
      auto& acc = per_subject[r.subject_id];
      for (std::size_t i = 0; i < ControlVector::kSize; ++i) acc.first[i] += r.chosen[i];
      acc.second += 1;
    }
    if (per_subject.empty())
      throw InsufficientDataError("no calibration records for emotion '" +
                                  std::string(to_string(e)) + "'");
    EmotionPreset preset{e, {}};
    for (std::size_t i = 0; i < ControlVector::kSize; ++i) {
      std::vector<double> means;
      for (const auto& [subject, acc] : per_subject) means.push_back(acc.first[i] / acc.second);
      std::sort(means.begin(), means.end());
      const std::size_t m = means.size();
      const double median = m % 2 ? means[m / 2] : 0.5 * (means[m / 2 - 1] + means[m / 2]);
      preset.vector[i] = std::round(median * 100.0) / 100.0;
    }
    out.push_back(preset);
  }
  return out;
}

std::string format_anova_table(const std::vector<AnovaResult>& results) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %12s %8s  %-6s %s\n", "parameter", "F", "p", "eta2",
                "effect", "df");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-10s %10.3f %12.3e %8.3f  %-6s (%d, %d)\n",
                  r.parameter.c_str(), r.F, r.p, r.eta2, std::string(to_string(r.label)).c_str(),
                  r.df_emotion, r.df_error);
    out << line;
  }
  return out.str();
}

std::string format_preset_table(const std::vector<EmotionPreset>& presets) {
  std::ostringstream out;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%-10s", "parameter");
  out << cell;
  for (const auto& p : presets) {
    std::snprintf(cell, sizeof cell, " %8s", std::string(to_string(p.emotion)).c_str());
    out << cell;
  }
  out << '\n';
  for (std::size_t i = 0; i < ControlVector::kSize; ++i) {
    std::snprintf(cell, sizeof cell, "%-10s", std::string(ControlVector::kNames[i]).c_str());
    out << cell;
    for (const auto& p : presets) {
      // +0.0 folds negative zero
      std::snprintf(cell, sizeof cell, " %8.2f", p.vector[i] + 0.0);
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace moodisp::stats
