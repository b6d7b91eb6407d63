#pragma once

#include <utility>
#include <vector>

namespace hatsr::stats {

struct FriedmanResult {
  double statistic = 0.0;     // tie-corrected, chi-square scale
  double p = 1.0;             // exact permutation p when `exact`, else p_asymptotic
  double p_asymptotic = 1.0;  // chi-square with k - 1 degrees of freedom
  bool exact = false;
};

/// Friedman test on a cases x methods matrix. Within-case midranks; the p
/// value comes from the exact within-row permutation distribution of the
/// rank sums whenever that distribution is small enough to enumerate.
FriedmanResult friedman_test(const std::vector<std::vector<double>>& scores, std::size_t max_states = 2'000'000);

struct WilcoxonResult {
  double statistic = 0.0;  // sum of positive ranks
  double z = 0.0;
  double p = 1.0;
  int n_nonzero = 0;
  bool exact = false;
};

/// Two-sided signed-rank test on x - y. Zero differences follow Pratt (ranked,
/// then dropped). Exact null distribution for up to 15 differences with no
/// zeros or ties; otherwise a normal approximation with tie and continuity
/// corrections.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);

/// Holm step-down adjustment, returned in input order.
std::vector<double> holm_adjust(const std::vector<double>& p);

struct PairwiseComparison {
  int a = 0, b = 0;  // column indices
  WilcoxonResult raw;
  double p_adjusted = 1.0;
};

/// Signed-rank test per column pair of a cases x methods matrix, Holm-adjusted
/// across the listed pairs.
std::vector<PairwiseComparison> pairwise_wilcoxon_holm(const std::vector<std::vector<double>>& scores,
                                                       const std::vector<std::pair<int, int>>& pairs);

struct McNemarResult {
  double p = 1.0;
  double statistic = 0.0;  // continuity-corrected chi-square when not exact
  bool exact = true;
};

/// Two-sided McNemar test on the discordant counts: exact binomial for
/// b + c < 25, continuity-corrected chi-square otherwise.
McNemarResult mcnemar_test(int b, int c);
inline double mcnemar_exact(int b, int c) { return mcnemar_test(b, c).p; }

/// Midranks (1-based, ties averaged).
std::vector<double> midranks(const std::vector<double>& v);

}  // namespace hatsr::stats
