#include "emgshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace emgshift::stats {

namespace {

// Midranks of the pooled sample; ties share the average of their positions.
std::vector<double> midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double choose(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Counts subsets of size `remaining` drawn from ranks[idx..] whose total sum
// deviates from the mean by at least `threshold`.
void count_extreme(const std::vector<double>& ranks, std::size_t idx, std::size_t remaining,
                   double partial_sum, double mu, double threshold, double& hits) {
  if (remaining == 0) {
    if (std::abs(partial_sum - mu) >= threshold - 1e-9) hits += 1.0;
    return;
  }
  if (ranks.size() - idx < remaining) return;
  count_extreme(ranks, idx + 1, remaining - 1, partial_sum + ranks[idx], mu, threshold, hits);
  count_extreme(ranks, idx + 1, remaining, partial_sum, mu, threshold, hits);
}

}  // namespace

RankSumResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b,
                                RankSumMode mode) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: both samples must be non-empty");
  const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;

  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::vector<double> ranks = midranks(pooled);

  RankSumResult res;
  for (std::size_t i = 0; i < n1; ++i) res.rank_sum += ranks[i];
  const double mu = static_cast<double>(n1) * static_cast<double>(n + 1) / 2.0;

  bool exact = mode == RankSumMode::kExact;
  if (mode == RankSumMode::kAuto)
    exact = std::min(n1, n2) < 8 && choose(n, std::min(n1, n2)) <= 1e6;

  if (exact) {
    const double threshold = std::abs(res.rank_sum - mu);
    double hits = 0.0;
    count_extreme(ranks, 0, n1, 0.0, mu, threshold, hits);
    res.p_value = hits / choose(n, n1);
    res.exact = true;
    return res;
  }

  // Tie-corrected variance.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double nn = static_cast<double>(n);
  const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                     ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double dev = res.rank_sum - mu;
  const double cc = dev > 0 ? -0.5 : (dev < 0 ? 0.5 : 0.0);  // continuity correction
  res.z = (dev + cc) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(std::abs(res.z) / std::sqrt(2.0)));
  return res;
}

std::vector<double> bonferroni(const std::vector<double>& pvals, int m) {
  if (m < static_cast<int>(pvals.size()))
    throw std::invalid_argument("bonferroni: m must cover the number of tests");
  std::vector<double> adj;
  adj.reserve(pvals.size());
  for (double p : pvals) adj.push_back(std::min(1.0, p * static_cast<double>(m)));
  return adj;
}

}  // namespace emgshift::stats
