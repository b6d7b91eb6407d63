#include "hatsr/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "hatsr/error.hpp"

namespace hatsr::stats {

std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (i + j) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = rank;
    i = j + 1;
  }
  return r;
}

namespace {

double chi2_sf(double x, double df) {
  if (x <= 0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

// Exact P(sum_j R_j^2 >= observed) under independent uniform permutations of
// each row's ranks. Ranks are doubled so every state is an integer vector.
// Returns a negative value when the state space exceeds the budget.
double friedman_exact_p(const std::vector<std::vector<int>>& doubled_ranks, long long observed_ss,
                        std::size_t max_states) {
  const std::size_t k = doubled_ranks.front().size();
  const long long base = 2LL * static_cast<long long>(doubled_ranks.size()) * static_cast<long long>(k) + 1;
  // Key packs the first k-1 sums; the last one follows from the fixed total.
  long double cap = 1;
  for (std::size_t j = 0; j + 1 < k; ++j) cap *= base;
  if (cap > 9.0e18L) return -1.0;

  struct State {
    std::vector<int> sums;
    double prob;
  };
  std::unordered_map<unsigned long long, State> states;
  states.emplace(0ULL, State{std::vector<int>(k, 0), 1.0});
  for (const auto& row : doubled_ranks) {
    std::vector<int> perm = row;
    std::sort(perm.begin(), perm.end());
    std::vector<std::vector<int>> arrangements;
    do arrangements.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    const double w = 1.0 / static_cast<double>(arrangements.size());

    std::unordered_map<unsigned long long, State> next;
    next.reserve(states.size() * arrangements.size());
    for (const auto& [key, st] : states) {
      for (const auto& a : arrangements) {
        std::vector<int> s = st.sums;
        unsigned long long nk = 0;
        for (std::size_t j = 0; j < k; ++j) s[j] += a[j];
        for (std::size_t j = 0; j + 1 < k; ++j) nk = nk * static_cast<unsigned long long>(base) + s[j];
        auto it = next.find(nk);
        if (it == next.end()) {
          next.emplace(nk, State{std::move(s), st.prob * w});
        } else {
          it->second.prob += st.prob * w;
        }
      }
      if (next.size() > max_states) return -1.0;
    }
    states = std::move(next);
  }
  double p = 0;
  for (const auto& [key, st] : states) {
    long long ss = 0;
    for (int v : st.sums) ss += static_cast<long long>(v) * v;
    if (ss >= observed_ss) p += st.prob;
  }
  return std::min(1.0, p);
}

}  // namespace

FriedmanResult friedman_test(const std::vector<std::vector<double>>& scores, std::size_t max_states) {
  const std::size_t n = scores.size();
  if (n < 2) throw InputError("friedman_test: need at least 2 cases");
  const std::size_t k = scores.front().size();
  if (k < 2) throw InputError("friedman_test: need at least 2 methods");

  std::vector<std::vector<int>> doubled(n);
  std::vector<double> rank_sum(k, 0.0);
  double sum_r2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i].size() != k) throw InputError("friedman_test: ragged score matrix");
    for (double v : scores[i])
      if (!std::isfinite(v)) throw InputError("friedman_test: non-finite score");
    const auto r = midranks(scores[i]);
    doubled[i].resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      rank_sum[j] += r[j];
      sum_r2 += r[j] * r[j];
      doubled[i][j] = static_cast<int>(std::lround(2 * r[j]));
    }
  }
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  const double denom = sum_r2 - nd * kd * (kd + 1) * (kd + 1) / 4.0;
  FriedmanResult res;
  if (denom <= 1e-12) return res;  // every row constant

  double num = 0;
  for (double rs : rank_sum) num += (rs - nd * (kd + 1) / 2.0) * (rs - nd * (kd + 1) / 2.0);
  res.statistic = (kd - 1.0) * num / denom;
  res.p_asymptotic = chi2_sf(res.statistic, kd - 1.0);
  res.p = res.p_asymptotic;

  long long observed = 0;
  std::vector<long long> sums(k, 0);
  for (const auto& row : doubled)
    for (std::size_t j = 0; j < k; ++j) sums[j] += row[j];
  for (long long s : sums) observed += s * s;
  const double exact = friedman_exact_p(doubled, observed, max_states);
  if (exact >= 0) {
    res.p = std::max(exact, std::numeric_limits<double>::min());
    res.exact = true;
  }
  return res;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("wilcoxon: samples differ in length");
  std::vector<double> d(x.size()), ad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    d[i] = x[i] - y[i];
    ad[i] = std::abs(d[i]);
  }
  WilcoxonResult res;
  const auto r = midranks(ad);
  std::size_t n0 = 0;
  std::vector<double> nonzero_abs;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == 0) {
      ++n0;
      continue;
    }
    nonzero_abs.push_back(ad[i]);
    if (d[i] > 0) res.statistic += r[i];
  }
  const std::size_t nz = nonzero_abs.size();
  res.n_nonzero = static_cast<int>(nz);
  if (nz == 0) return res;

  std::sort(nonzero_abs.begin(), nonzero_abs.end());
  double tie_term = 0;
  bool ties = false;
  for (std::size_t i = 0; i < nz;) {
    std::size_t j = i;
    while (j + 1 < nz && nonzero_abs[j + 1] == nonzero_abs[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1) ties = true;
    tie_term += t * t * t - t;
    i = j + 1;
  }

  if (n0 == 0 && !ties && nz <= 15) {
    // Null distribution of the positive-rank sum over all sign patterns.
    const int max_sum = static_cast<int>(nz * (nz + 1) / 2);
    std::vector<double> counts(static_cast<std::size_t>(max_sum) + 1, 0.0);
    counts[0] = 1;
    for (int rank = 1; rank <= static_cast<int>(nz); ++rank)
      for (int s = max_sum; s >= rank; --s) counts[s] += counts[s - rank];
    const double total = std::ldexp(1.0, static_cast<int>(nz));
    const int v = static_cast<int>(std::lround(res.statistic));
    double lower = 0, upper = 0;
    for (int s = 0; s <= max_sum; ++s) {
      if (s <= v) lower += counts[s];
      if (s >= v) upper += counts[s];
    }
    res.exact = true;
    res.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    return res;
  }

  const double n = static_cast<double>(d.size()), z0 = static_cast<double>(n0);
  const double mean = (n * (n + 1) - z0 * (z0 + 1)) / 4.0;
  const double var = (n * (n + 1) * (2 * n + 1) - z0 * (z0 + 1) * (2 * z0 + 1)) / 24.0 - tie_term / 48.0;
  if (var <= 0) return res;
  const double diff = res.statistic - mean;
  const double cc = diff > 0 ? 0.5 : (diff < 0 ? -0.5 : 0.0);
  res.z = (diff - cc) / std::sqrt(var);
  const double tail = boost::math::cdf(boost::math::complement(boost::math::normal(), std::abs(res.z)));
  res.p = std::min(1.0, 2.0 * tail);
  return res;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = std::min(1.0, static_cast<double>(m - i) * p[order[i]]);
    running = std::max(running, v);
    adj[order[i]] = running;
  }
  return adj;
}

std::vector<PairwiseComparison> pairwise_wilcoxon_holm(const std::vector<std::vector<double>>& scores,
                                                       const std::vector<std::pair<int, int>>& pairs) {
  std::vector<PairwiseComparison> out;
  std::vector<double> raw;
  for (const auto& [a, b] : pairs) {
    std::vector<double> x, y;
    for (const auto& row : scores) {
      if (a < 0 || b < 0 || static_cast<std::size_t>(std::max(a, b)) >= row.size()) {
        throw InputError("pairwise_wilcoxon_holm: column index out of range");
      }
      x.push_back(row[a]);
      y.push_back(row[b]);
    }
    PairwiseComparison pc;
    pc.a = a;
    pc.b = b;
    pc.raw = wilcoxon_signed_rank(x, y);
    raw.push_back(pc.raw.p);
    out.push_back(pc);
  }
  const auto adj = holm_adjust(raw);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].p_adjusted = adj[i];
  return out;
}

McNemarResult mcnemar_test(int b, int c) {
  if (b < 0 || c < 0) throw InputError("mcnemar: negative discordant count");
  McNemarResult res;
  const int n = b + c;
  if (n == 0) return res;
  if (n < 25) {
    // Exact: binomial coefficients below 2^53 are representable.
    double tail = 0, coef = 1;
    const int m = std::min(b, c);
    for (int k = 0; k <= m; ++k) {
      tail += coef;
      coef = coef * (n - k) / (k + 1);
    }
    res.p = std::min(1.0, 2.0 * std::ldexp(tail, -n));
    return res;
  }
  res.exact = false;
  const double diff = std::abs(b - c) - 1.0;
  res.statistic = diff > 0 ? diff * diff / n : 0.0;
  res.p = chi2_sf(res.statistic, 1.0);
  return res;
}

}  // namespace hatsr::stats
