#pragma once

#include <vector>

namespace emgshift::stats {

enum class RankSumMode { kAuto, kExact, kNormal };

struct RankSumResult {
  double rank_sum = 0.0;  // sum of sample-a midranks
  double z = 0.0;         // standardized statistic (normal mode)
  double p_value = 1.0;   // two-sided
  bool exact = false;
};

// Two-sided Wilcoxon rank-sum test with midrank tie handling. Exact mode
// enumerates all assignments of the pooled ranks; normal mode uses the
// tie-corrected normal approximation with continuity correction. Auto picks
// exact for small samples (min(n1,n2) < 8) when the enumeration stays cheap.
RankSumResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b,
                                RankSumMode mode = RankSumMode::kAuto);

// p_adj = min(1, p * m); m must cover the number of tests.
std::vector<double> bonferroni(const std::vector<double>& pvals, int m);

}  // namespace emgshift::stats
