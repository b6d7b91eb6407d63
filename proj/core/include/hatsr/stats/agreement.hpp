#pragma once

#include <vector>

#include "hatsr/stats/types.hpp"

namespace hatsr::stats {

enum class Weighting { kIdentity, kLinear, kQuadratic };

/// q x q agreement weights: identity, 1 - |k-l|/(q-1), or 1 - (k-l)^2/(q-1)^2.
std::vector<std::vector<double>> agreement_weights(int categories, Weighting weighting);

struct AgreementResult {
  double coefficient = 1.0;
  double se = 0.0;
  double ci_lo = 1.0, ci_hi = 1.0;
  double pa = 1.0, pe = 0.0;
  int subjects = 0;
  /// Only one category was used across all ratings; the coefficient is
  /// reported as 1 and the interval carries no information.
  bool degenerate = false;
};

/// Gwet's AC2 for a subjects x raters matrix of 0-based categories, with -1
/// marking a missing rating. The interval uses Gwet's variance estimator and
/// a t quantile with subjects - 1 degrees of freedom.
AgreementResult gwet_ac2(const std::vector<std::vector<int>>& ratings, int categories, Weighting weighting,
                         double level = 0.95);

/// AC2 over readers for one item and method; subjects are (case, side).
AgreementResult gwet_ac2(const RatingsTable& table, Item item, Method method, Weighting weighting,
                         double level = 0.95);

struct KappaResult {
  double kappa = 1.0;
  double se = 0.0;
  double ci_lo = 1.0, ci_hi = 1.0;
  double po = 1.0, pe = 0.0;
  /// False when 1 - pe vanishes (both gradings stuck in one category).
  bool defined = true;
};

/// Cohen's kappa between two aligned gradings. The interval is
/// kappa +- z * SE with the large-sample variance of Fleiss, Cohen and
/// Everitt, clipped to [-1, 1].
KappaResult cohen_kappa(const std::vector<int>& a, const std::vector<int>& b, int categories,
                        Weighting weighting = Weighting::kIdentity, double level = 0.95);

}  // namespace hatsr::stats
