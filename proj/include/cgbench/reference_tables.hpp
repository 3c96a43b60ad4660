#pragma once

#include <array>
#include <string>
#include <vector>

namespace cgbench {

// Published evaluation tables, frozen as known-answer fixtures for the delta
// and statistics formatting. Each row keeps the printed strings verbatim; the
// audit helpers recompute every derivable cell from the row's own inputs and
// report where print and arithmetic disagree, so tests can assert the
// recomputed value while surfacing the printed one.

struct PublishedDelta {
  const char* group;    // "guidance-t2c", "concise-c2c", ...
  const char* label;    // row label, e.g. "ChatGPT-detail"
  const char* metric;   // "BLEU" / "CodeBLEU"
  double score;         // printed row score
  double base;          // printed baseline score
  const char* printed;  // printed delta string
  bool consistent;      // printed matches relative_delta(score, base)
};

// 16 delta cells; 14 are arithmetically consistent with their row inputs.
const std::vector<PublishedDelta>& published_deltas();

struct PublishedRoundStats {
  const char* group;   // "rounds-t2c" / "rounds-c2c"
  const char* metric;  // "BLEU" / "CodeBLEU"
  std::array<double, 5> rounds;
  const char* printed_min;
  const char* printed_max;
  const char* printed_avg;
  const char* printed_std;  // sample standard deviation, two decimals
  bool min_consistent, max_consistent, avg_consistent, std_consistent;
};

// 4 stat rows (16 cells); 13 cells are consistent with the round values.
const std::vector<PublishedRoundStats>& published_round_stats();

struct CellAudit {
  std::string cell;      // "guidance-t2c/ChatGPT-detail/BLEU" or "rounds-c2c/CodeBLEU/std"
  std::string printed;   // string as published
  std::string computed;  // recomputed from the row inputs
  bool consistent = false;
};

// Live recomputation of every delta / stat cell against the printed strings.
std::vector<CellAudit> audit_published_deltas();
std::vector<CellAudit> audit_published_stats();

}  // namespace cgbench
