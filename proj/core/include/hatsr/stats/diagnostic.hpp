#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hatsr/stats/types.hpp"

namespace hatsr::stats {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for successes / n. Throws InputError unless
/// 0 <= successes <= n and n >= 1.
Interval wilson_ci(int successes, int n, double level = 0.95);

struct DiagnosticResult {
  DiagnosticCounts counts;
  double sensitivity = 0, specificity = 0, accuracy = 0;
  Interval sensitivity_ci, specificity_ci, accuracy_ci;
  int excluded = 0;  // compartments without a reference grade
  /// tp + fn or tn + fp disagree with the reference totals.
  bool counts_inconsistent = false;
};

/// Per-compartment tallies. A compartment is reference-positive when its
/// reference grade is at least 1 and detected when the MRI grade is at least
/// 1. Reference 3 read as 2B counts as FP; reference 2B read as 3 counts as
/// FN. Compartments without a reference are skipped and counted.
DiagnosticCounts count_findings(const std::vector<NoyesGrade>& mri, const std::vector<std::optional<NoyesGrade>>& ref,
                                int* excluded = nullptr);

/// Sensitivity tp/ref_pos, specificity tn/ref_neg, accuracy
/// (tp+tn)/(ref_pos+ref_neg), each with a Wilson interval.
DiagnosticResult diagnostic_performance(const DiagnosticCounts& counts, double level = 0.95);
DiagnosticResult diagnostic_performance(const std::vector<NoyesGrade>& mri,
                                        const std::vector<std::optional<NoyesGrade>>& ref, double level = 0.95);

/// Mann-Whitney AUC: P(score_pos > score_neg) + P(tie) / 2. NaN when either
/// class is empty.
double auc_mann_whitney(const std::vector<double>& scores, const std::vector<int>& positive);

struct AucResult {
  double auc = 0.5;
  Interval ci;
  bool defined = true;  // false for a single-class reference
  int resamples = 0;
};

/// AUC with a case-resampling percentile bootstrap interval. Replicate r
/// draws from its own generator seeded from (seed, r); single-class
/// resamples are redrawn.
AucResult roc_auc(const std::vector<double>& scores, const std::vector<int>& positive, int bootstrap_n = 2000,
                  std::uint64_t seed = 0, double level = 0.95);

/// Three-reader consensus on 0-based categories: a value held by at least
/// two readers, else the median. Throws InputError unless exactly 3 readings.
int consensus(const std::vector<int>& readings);

}  // namespace hatsr::stats
