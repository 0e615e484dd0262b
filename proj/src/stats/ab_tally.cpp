#include "moodisp/stats/ab_tally.hpp"

#include <cstdio>
#include <sstream>

#include "moodisp/stats/distributions.hpp"

namespace moodisp::stats {

void rounded_percentages(long long a, long long b, int& pct_a, int& pct_b) {
  const long long n = a + b;
  if (n == 0) {
    pct_a = pct_b = 0;
    return;
  }
  // floor(100 a / n + 1/2) in exact integer arithmetic
  pct_a = static_cast<int>((200 * a + n) / (2 * n));
  pct_b = static_cast<int>((200 * b + n) / (2 * n));
  if (pct_a + pct_b != 100) {
    if (a >= b)
      pct_a = 100 - pct_b;
    else
      pct_b = 100 - pct_a;
  }
}

namespace {

void finish(AbTallyRow& row) {
  row.trials = row.prefer_emotion + row.prefer_neutral;
  rounded_percentages(row.prefer_emotion, row.prefer_neutral, row.pct_emotion, row.pct_neutral);
  row.p_value = row.trials > 0 ? binomial_two_sided_p(row.prefer_emotion, row.trials) : 1.0;
}

}  // namespace

AbTally ab_tally(const std::vector<ABRecord>& records) {
  if (records.empty()) throw InsufficientDataError("A/B tally needs at least one record");
  AbTally t;
  for (const auto& r : records) {
    auto& row = r.is_correct_emotion ? t.correct : t.wrong;
    (r.choice == AbChoice::EmotionSide ? row.prefer_emotion : row.prefer_neutral) += 1;
  }
  finish(t.correct);
  finish(t.wrong);
  return t;
}

std::string format_ab_tally(const AbTally& t) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %16s %16s %8s %12s\n", "condition", "prefer emotion",
                "prefer neutral", "trials", "binomial p");
  out << line;
  const auto row = [&](const char* name, const AbTallyRow& r) {
    std::snprintf(line, sizeof line, "%-16s %9d%% (%3lld) %9d%% (%3lld) %8lld %12.3e\n", name,
                  r.pct_emotion, r.prefer_emotion, r.pct_neutral, r.prefer_neutral, r.trials,
                  r.p_value);
    out << line;
  };
  row("correct emotion", t.correct);
  row("wrong emotion", t.wrong);
  return out.str();
}

}  // namespace moodisp::stats
