#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hatsr/stats/agreement.hpp"
#include "hatsr/stats/ratings.hpp"

namespace hatsr::stats {

/// A report in two renderings: aligned text for people and long-form
/// tab-separated records (section, item, method, metric, value, display).
struct Report {
  std::string text;
  std::string tsv;
};

/// "< 0.001", "> 0.99", otherwise three decimals.
std::string format_p(double p);

/// Integer percent for display. A proportion strictly between 0 and 1 never
/// displays as 0 or 100.
int display_percent(double proportion);

/// Image-quality comparison: reader-averaged median [IQR] per method, pooled
/// inter-reader AC2, Friedman test and Holm-adjusted pairwise signed-rank
/// tests. Likert items only.
Report compare_report(const RatingsTable& table, Weighting weighting = Weighting::kLinear);

/// Per-method reader counts, inter-reader AC2 and consensus, plus
/// consensus-level kappa and McNemar tests of LR and SR against HR.
Report agreement_report(const RatingsTable& table, Weighting weighting = Weighting::kLinear);

/// Cartilage-lesion detection per method against the reference standard:
/// prevalence, MRI frequency, findings, sensitivity, specificity and AUC.
Report diagnostic_report(const std::vector<DiagnosticRow>& rows, int bootstrap_n = 2000, std::uint64_t seed = 0);

}  // namespace hatsr::stats
