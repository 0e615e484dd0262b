#pragma once

#include <string>
#include <vector>

#include "moodisp/stats/records.hpp"

namespace moodisp::stats {

struct AbTallyRow {
  long long trials = 0;
  long long prefer_emotion = 0;
  long long prefer_neutral = 0;
  /// Integer percentages, round-half-up, adjusted so the pair sums to 100.
  /// Both zero when the row has no trials.
  int pct_emotion = 0;
  int pct_neutral = 0;
  /// Two-sided exact binomial test against 50 %; 1 for an empty row.
  double p_value = 1.0;
};

struct AbTally {
  AbTallyRow correct;  ///< emotion matched the clip's label
  AbTallyRow wrong;    ///< emotion contradicted the label
};

/// Splits a percentage pair so that it sums to exactly 100.
void rounded_percentages(long long a, long long b, int& pct_a, int& pct_b);

/// Throws InsufficientDataError on an empty record set.
AbTally ab_tally(const std::vector<ABRecord>& records);

std::string format_ab_tally(const AbTally& t);

}  // namespace moodisp::stats
