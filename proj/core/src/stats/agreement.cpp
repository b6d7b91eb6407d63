#include "hatsr/stats/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "hatsr/error.hpp"
#include "hatsr/stats/ratings.hpp"

namespace hatsr::stats {

std::vector<std::vector<double>> agreement_weights(int categories, Weighting weighting) {
  if (categories < 2) throw InputError("agreement weights need at least 2 categories");
  const int q = categories;
  std::vector<std::vector<double>> w(q, std::vector<double>(q, 0.0));
  for (int k = 0; k < q; ++k) {
    for (int l = 0; l < q; ++l) {
      const double d = std::abs(k - l) / static_cast<double>(q - 1);
      switch (weighting) {
        case Weighting::kIdentity: w[k][l] = k == l ? 1.0 : 0.0; break;
        case Weighting::kLinear: w[k][l] = 1.0 - d; break;
        case Weighting::kQuadratic: w[k][l] = 1.0 - d * d; break;
      }
    }
  }
  return w;
}

AgreementResult gwet_ac2(const std::vector<std::vector<int>>& ratings, int categories, Weighting weighting,
                         double level) {
  const int q = categories;
  const auto w = agreement_weights(q, weighting);
  const std::size_t n = ratings.size();
  if (n < 2) throw InputError("gwet_ac2: need at least 2 subjects");

  // r_ik counts per subject and category.
  std::vector<std::vector<double>> r(n, std::vector<double>(q, 0.0));
  std::vector<double> ri(n, 0.0);
  std::size_t max_raters = 0;
  std::vector<bool> used(q, false);
  for (std::size_t i = 0; i < n; ++i) {
    max_raters = std::max(max_raters, ratings[i].size());
    for (int c : ratings[i]) {
      if (c < 0) continue;
      if (c >= q) throw InputError("gwet_ac2: category out of range");
      r[i][c] += 1;
      ri[i] += 1;
      used[c] = true;
    }
  }
  if (max_raters < 2) throw InputError("gwet_ac2: need at least 2 raters");

  AgreementResult res;
  res.subjects = static_cast<int>(n);
  if (std::count(used.begin(), used.end(), true) <= 1) {
    res.degenerate = true;
    return res;
  }

  double tw = 0;
  for (const auto& row : w)
    for (double v : row) tw += v;
  const double pe_scale = tw / (q * (q - 1.0));

  std::vector<double> pi(q, 0.0);
  std::size_t n2 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (ri[i] >= 2) ++n2;
  if (n2 == 0) throw InputError("gwet_ac2: no subject rated by two or more raters");
  for (std::size_t i = 0; i < n; ++i) {
    if (ri[i] < 1) continue;
    for (int k = 0; k < q; ++k) pi[k] += r[i][k] / ri[i];
  }
  for (double& v : pi) v /= static_cast<double>(n);

  std::vector<double> pa_i(n, 0.0), pe_i(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (ri[i] >= 2) {
      double s = 0;
      for (int k = 0; k < q; ++k) {
        double rstar = 0;
        for (int l = 0; l < q; ++l) rstar += w[k][l] * r[i][l];
        s += r[i][k] * (rstar - 1.0);
      }
      pa_i[i] = s / (ri[i] * (ri[i] - 1.0));
    }
    if (ri[i] >= 1) {
      double s = 0;
      for (int k = 0; k < q; ++k) s += r[i][k] / ri[i] * (1.0 - pi[k]);
      pe_i[i] = pe_scale * s;
    }
  }
  double pa = 0;
  for (double v : pa_i) pa += v;
  pa /= static_cast<double>(n2);
  double pe = 0;
  for (int k = 0; k < q; ++k) pe += pi[k] * (1.0 - pi[k]);
  pe *= pe_scale;

  res.pa = pa;
  res.pe = pe;
  if (std::abs(1.0 - pe) < 1e-15) {
    res.degenerate = true;
    return res;
  }
  const double ac2 = (pa - pe) / (1.0 - pe);
  res.coefficient = ac2;

  const double nn = static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pa_scaled = ri[i] >= 2 ? nn / n2 * pa_i[i] : 0.0;
    const double ac_i = (pa_scaled - pe) / (1.0 - pe);
    const double ac_star = ac_i - 2.0 * (1.0 - ac2) * (pe_i[i] - pe) / (1.0 - pe);
    ss += (ac_star - ac2) * (ac_star - ac2);
  }
  res.se = std::sqrt(ss / (nn * (nn - 1.0)));
  const boost::math::students_t t(nn - 1.0);
  const double tq = boost::math::quantile(t, 1.0 - (1.0 - level) / 2.0);
  res.ci_lo = std::max(-1.0, ac2 - tq * res.se);
  res.ci_hi = std::min(1.0, ac2 + tq * res.se);
  return res;
}

AgreementResult gwet_ac2(const RatingsTable& table, Item item, Method method, Weighting weighting, double level) {
  return gwet_ac2(reader_matrix(table, item, method).categories, category_count(item_scale(item)), weighting, level);
}

KappaResult cohen_kappa(const std::vector<int>& a, const std::vector<int>& b, int categories, Weighting weighting,
                        double level) {
  if (a.size() != b.size()) throw InputError("cohen_kappa: gradings differ in length");
  if (a.empty()) throw InputError("cohen_kappa: no cases");
  const int q = categories;
  const auto w = agreement_weights(q, weighting);
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<double>> p(q, std::vector<double>(q, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || a[i] >= q || b[i] < 0 || b[i] >= q) throw InputError("cohen_kappa: category out of range");
    p[a[i]][b[i]] += 1.0 / n;
  }
  std::vector<double> row(q, 0.0), col(q, 0.0);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      row[i] += p[i][j];
      col[j] += p[i][j];
    }
  double po = 0, pe = 0;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      po += w[i][j] * p[i][j];
      pe += w[i][j] * row[i] * col[j];
    }
  KappaResult res;
  res.po = po;
  res.pe = pe;
  if (std::abs(1.0 - pe) < 1e-15) {
    res.defined = false;
    res.kappa = std::numeric_limits<double>::quiet_NaN();
    res.ci_lo = res.ci_hi = res.kappa;
    return res;
  }
  const double k = (po - pe) / (1.0 - pe);
  res.kappa = k;

  std::vector<double> wrow(q, 0.0), wcol(q, 0.0);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      wrow[i] += col[j] * w[i][j];
      wcol[j] += row[i] * w[i][j];
    }
  double s = 0;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double d = w[i][j] - (wrow[i] + wcol[j]) * (1.0 - k);
      s += p[i][j] * d * d;
    }
  const double c = k - pe * (1.0 - k);
  const double var = std::max(0.0, (s - c * c) / (n * (1.0 - pe) * (1.0 - pe)));
  res.se = std::sqrt(var);
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - (1.0 - level) / 2.0);
  res.ci_lo = std::max(-1.0, k - z * res.se);
  res.ci_hi = std::min(1.0, k + z * res.se);
  return res;
}

}  // namespace hatsr::stats
