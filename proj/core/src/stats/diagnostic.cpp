#include "hatsr/stats/diagnostic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "hatsr/error.hpp"

namespace hatsr::stats {

void DiagnosticCounts::validate() const {
  if (tp < 0 || tn < 0 || fp < 0 || fn < 0 || ref_pos < 0 || ref_neg < 0) {
    throw InputError("diagnostic counts must be nonnegative");
  }
  if (tp > ref_pos) throw InputError("diagnostic counts: tp exceeds reference positives");
  if (tn > ref_neg) throw InputError("diagnostic counts: tn exceeds reference negatives");
}

Interval wilson_ci(int successes, int n, double level) {
  if (n < 1) throw InputError("wilson_ci: n must be >= 1");
  if (successes < 0 || successes > n) throw InputError("wilson_ci: successes outside [0, n]");
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - (1.0 - level) / 2.0);
  const double nn = n, p = successes / nn, z2 = z * z;
  const double center = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z / (1 + z2 / nn) * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.lo = 0.0;
  if (successes == n) ci.hi = 1.0;
  return ci;
}

DiagnosticCounts count_findings(const std::vector<NoyesGrade>& mri, const std::vector<std::optional<NoyesGrade>>& ref,
                                int* excluded) {
  if (mri.size() != ref.size()) throw InputError("diagnostic: MRI and reference gradings differ in length");
  DiagnosticCounts c;
  int skipped = 0;
  for (std::size_t i = 0; i < mri.size(); ++i) {
    if (!ref[i]) {
      ++skipped;
      continue;
    }
    const NoyesGrade r = *ref[i], m = mri[i];
    if (r == NoyesGrade::k0) {
      ++c.ref_neg;
      (m == NoyesGrade::k0 ? c.tn : c.fp)++;
      continue;
    }
    ++c.ref_pos;
    if (m == NoyesGrade::k0) {
      ++c.fn;
    } else if (r == NoyesGrade::k3 && m == NoyesGrade::k2B) {
      ++c.fp;
    } else if (r == NoyesGrade::k2B && m == NoyesGrade::k3) {
      ++c.fn;
    } else {
      ++c.tp;
    }
  }
  if (excluded) *excluded = skipped;
  return c;
}

DiagnosticResult diagnostic_performance(const DiagnosticCounts& counts, double level) {
  counts.validate();
  if (counts.ref_pos < 1 || counts.ref_neg < 1) {
    throw InputError("diagnostic: need at least one reference positive and one reference negative");
  }
  DiagnosticResult res;
  res.counts = counts;
  res.sensitivity = static_cast<double>(counts.tp) / counts.ref_pos;
  res.specificity = static_cast<double>(counts.tn) / counts.ref_neg;
  res.accuracy = static_cast<double>(counts.tp + counts.tn) / (counts.ref_pos + counts.ref_neg);
  res.sensitivity_ci = wilson_ci(counts.tp, counts.ref_pos, level);
  res.specificity_ci = wilson_ci(counts.tn, counts.ref_neg, level);
  res.accuracy_ci = wilson_ci(counts.tp + counts.tn, counts.ref_pos + counts.ref_neg, level);
  res.counts_inconsistent = counts.inconsistent();
  return res;
}

DiagnosticResult diagnostic_performance(const std::vector<NoyesGrade>& mri,
                                        const std::vector<std::optional<NoyesGrade>>& ref, double level) {
  int excluded = 0;
  const auto counts = count_findings(mri, ref, &excluded);
  auto res = diagnostic_performance(counts, level);
  res.excluded = excluded;
  return res;
}

double auc_mann_whitney(const std::vector<double>& scores, const std::vector<int>& positive) {
  if (scores.size() != positive.size()) throw InputError("auc: scores and reference differ in length");
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double rank = (i + j) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (positive[order[t]]) {
        pos_rank_sum += rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1) / 2.0) / (np * nn);
}

AucResult roc_auc(const std::vector<double>& scores, const std::vector<int>& positive, int bootstrap_n,
                  std::uint64_t seed, double level) {
  AucResult res;
  res.auc = auc_mann_whitney(scores, positive);
  if (std::isnan(res.auc)) {
    res.defined = false;
    res.ci = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return res;
  }
  res.ci = {res.auc, res.auc};
  if (bootstrap_n <= 0) return res;

  const std::size_t n = scores.size();
  std::vector<double> reps;
  reps.reserve(static_cast<std::size_t>(bootstrap_n));
  std::vector<double> s(n);
  std::vector<int> p(n);
  for (int r = 0; r < bootstrap_n; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double a = std::numeric_limits<double>::quiet_NaN();
    while (std::isnan(a)) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = pick(rng);
        s[i] = scores[j];
        p[i] = positive[j];
      }
      a = auc_mann_whitney(s, p);
    }
    reps.push_back(a);
  }
  std::sort(reps.begin(), reps.end());
  const auto quantile = [&](double q) {
    const double h = (reps.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, reps.size() - 1);
    return reps[lo] + (h - lo) * (reps[hi] - reps[lo]);
  };
  const double alpha = 1.0 - level;
  res.ci = {quantile(alpha / 2), quantile(1 - alpha / 2)};
  res.resamples = bootstrap_n;
  return res;
}

int consensus(const std::vector<int>& readings) {
  if (readings.size() != 3) throw InputError("consensus: exactly 3 readings required");
  int a = readings[0], b = readings[1], c = readings[2];
  if (a == b || a == c) return a;
  if (b == c) return b;
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  return b;
}

}  // namespace hatsr::stats
