#include "hatsr/stats/report.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "hatsr/error.hpp"
#include "hatsr/stats/diagnostic.hpp"
#include "hatsr/stats/tests.hpp"

namespace hatsr::stats {

namespace {

constexpr Method kMethods[] = {Method::kLR, Method::kSR, Method::kHR};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string num(double v) { return std::isfinite(v) ? fmt("%.10g", v) : "NA"; }

class Records {
 public:
  Records() { out_ << "section\titem\tmethod\tmetric\tvalue\tdisplay\n"; }
  void add(const std::string& section, const std::string& item, const std::string& method, const std::string& metric,
           double value, const std::string& display = "") {
    out_ << section << '\t' << item << '\t' << method << '\t' << metric << '\t' << num(value) << '\t' << display
         << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' '); }

// Type-7 quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double q) {
  const double h = (sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

std::string short_num(double v) {
  std::string s = fmt("%.2f", v);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string coef_ci(const AgreementResult& a) {
  if (a.degenerate) return "1 (single category)";
  if (a.coefficient == 1.0 && a.se == 0.0) return "1";
  return fmt("%.3f", a.coefficient) + " [" + fmt("%.3f", a.ci_lo) + ", " + fmt("%.3f", a.ci_hi) + "]";
}

std::string kappa_ci(const KappaResult& k) {
  if (!k.defined) return "undefined";
  if (k.kappa == 1.0 && k.se == 0.0) return "1";
  return fmt("%.2f", k.kappa) + " [" + fmt("%.2f", k.ci_lo) + ", " + fmt("%.2f", k.ci_hi) + "]";
}

std::string pct_ci(double p, const Interval& ci) {
  return std::to_string(display_percent(p)) + " [" + std::to_string(display_percent(ci.lo)) + "," +
         std::to_string(display_percent(ci.hi)) + "]";
}

std::string count_pct(int k, int n) {
  const double pct = n > 0 ? 100.0 * k / n : 0.0;
  return std::to_string(k) + "/" + std::to_string(n) + " (" + short_num(std::round(pct * 10) / 10) + "%)";
}

// Consensus category per subject for one item and method.
std::map<std::string, int> consensus_by_subject(const ReaderMatrix& m) {
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < m.subjects.size(); ++i) {
    std::vector<int> r;
    for (int c : m.categories[i])
      if (c >= 0) r.push_back(c);
    if (r.size() == 3) {
      out[m.subjects[i]] = consensus(r);
    } else if (!r.empty()) {
      std::sort(r.begin(), r.end());
      out[m.subjects[i]] = r[(r.size() - 1) / 2];
    }
  }
  return out;
}

}  // namespace

std::string format_p(double p) {
  if (!std::isfinite(p)) return "NA";
  if (p < 0.001) return "< 0.001";
  if (p > 0.99) return "> 0.99";
  return fmt("%.3f", p);
}

int display_percent(double proportion) {
  int v = static_cast<int>(std::lround(100.0 * proportion));
  if (proportion > 0.0 && proportion < 1.0) v = std::clamp(v, 1, 99);
  return v;
}

Report compare_report(const RatingsTable& table, Weighting weighting) {
  Records rec;
  std::ostringstream txt;
  txt << pad("Item", 22) << pad("LR", 16) << pad("SR", 16) << pad("HR", 16) << pad("Interreader AC2", 26)
      << pad("Friedman", 10) << pad("LR vs SR", 10) << pad("LR vs HR", 10) << "SR vs HR\n";
  bool any = false;
  for (Item item : items_in(table)) {
    if (item_scale(item) != Scale::kLikert) continue;
    any = true;
    const std::string name = item_name(item);

    // Reader-averaged Likert value per subject and method.
    std::map<std::string, std::array<double, 3>> avg;
    std::map<std::string, std::array<int, 3>> seen;
    std::vector<std::vector<int>> pooled;
    for (int mi = 0; mi < 3; ++mi) {
      const auto m = reader_matrix(table, item, kMethods[mi]);
      for (std::size_t i = 0; i < m.subjects.size(); ++i) {
        double s = 0;
        int c = 0;
        for (int v : m.categories[i])
          if (v >= 0) {
            s += v + 1;
            ++c;
          }
        if (c == 0) continue;
        avg[m.subjects[i]][mi] = s / c;
        seen[m.subjects[i]][mi] = 1;
        pooled.push_back(m.categories[i]);
      }
    }
    std::vector<std::vector<double>> matrix;
    std::array<std::vector<double>, 3> per_method;
    for (const auto& [subject, vals] : avg) {
      const auto& s = seen[subject];
      for (int mi = 0; mi < 3; ++mi)
        if (s[mi]) per_method[mi].push_back(vals[mi]);
      if (s[0] && s[1] && s[2]) matrix.push_back({vals[0], vals[1], vals[2]});
    }

    txt << pad(name, 22);
    for (int mi = 0; mi < 3; ++mi) {
      auto v = per_method[mi];
      std::sort(v.begin(), v.end());
      const std::string mname = method_name(kMethods[mi]);
      if (v.empty()) {
        txt << pad("NA", 16);
        continue;
      }
      const double med = quantile(v, 0.5), q1 = quantile(v, 0.25), q3 = quantile(v, 0.75);
      txt << pad(short_num(med) + " [" + short_num(q1) + "," + short_num(q3) + "]", 16);
      rec.add("compare", name, mname, "median", med);
      rec.add("compare", name, mname, "q1", q1);
      rec.add("compare", name, mname, "q3", q3);
    }

    std::string ac2_text = "NA";
    if (pooled.size() >= 2) {
      const auto ac2 = gwet_ac2(pooled, 5, weighting);
      ac2_text = coef_ci(ac2);
      rec.add("compare", name, "all", "ac2", ac2.coefficient, ac2_text);
      rec.add("compare", name, "all", "ac2_lo", ac2.ci_lo);
      rec.add("compare", name, "all", "ac2_hi", ac2.ci_hi);
    }
    txt << pad(ac2_text, 26);

    if (matrix.size() >= 2) {
      const auto fr = friedman_test(matrix);
      rec.add("compare", name, "all", "friedman_statistic", fr.statistic);
      rec.add("compare", name, "all", "friedman_p", fr.p, format_p(fr.p));
      txt << pad(format_p(fr.p), 10);
      const auto pw = pairwise_wilcoxon_holm(matrix, {{0, 1}, {0, 2}, {1, 2}});
      const char* labels[] = {"lr_vs_sr", "lr_vs_hr", "sr_vs_hr"};
      for (std::size_t i = 0; i < pw.size(); ++i) {
        rec.add("compare", name, labels[i], "p_raw", pw[i].raw.p);
        rec.add("compare", name, labels[i], "p_holm", pw[i].p_adjusted, format_p(pw[i].p_adjusted));
        txt << (i + 1 < pw.size() ? pad(format_p(pw[i].p_adjusted), 10) : format_p(pw[i].p_adjusted));
      }
    } else {
      txt << "NA (need complete LR/SR/HR scores for at least 2 subjects)";
    }
    txt << '\n';
  }
  if (!any) throw InputError("compare: no Likert items in the ratings table");
  txt << "Medians and IQRs are over reader-averaged scores. P values: Friedman test, then pairwise\n"
         "signed-rank tests with Holm correction.\n";
  return {txt.str(), rec.str()};
}

Report agreement_report(const RatingsTable& table, Weighting weighting) {
  Records rec;
  std::ostringstream txt;
  for (Item item : items_in(table)) {
    const std::string name = item_name(item);
    const Scale scale = item_scale(item);
    const int q = category_count(scale);
    const Weighting w = scale == Scale::kBinary ? Weighting::kIdentity : weighting;
    txt << name << '\n';

    std::array<std::map<std::string, int>, 3> cons;
    for (int mi = 0; mi < 3; ++mi) {
      const Method method = kMethods[mi];
      const std::string mname = method_name(method);
      const auto m = reader_matrix(table, item, method);
      if (m.subjects.empty()) continue;
      cons[mi] = consensus_by_subject(m);
      std::string ac2_text = "NA";
      if (m.subjects.size() >= 2 && m.readers.size() >= 2) {
        const auto ac2 = gwet_ac2(m.categories, q, w);
        ac2_text = coef_ci(ac2);
        rec.add("agreement", name, mname, "ac2", ac2.coefficient, ac2_text);
        rec.add("agreement", name, mname, "ac2_lo", ac2.ci_lo);
        rec.add("agreement", name, mname, "ac2_hi", ac2.ci_hi);
      }
      // Rows: one per positive category (binary), per grade (Noyes), or a
      // single summary row (Likert).
      std::vector<int> shown;
      if (scale == Scale::kBinary) shown = {1};
      if (scale == Scale::kNoyes) shown = {0, 1, 2, 3, 4};
      if (shown.empty()) {
        txt << "  " << pad(mname, 14) << "AC2 " << ac2_text << '\n';
        continue;
      }
      for (std::size_t si = 0; si < shown.size(); ++si) {
        const int cat = shown[si];
        const std::string label =
            scale == Scale::kNoyes ? mname + "-Grade " + noyes_token(static_cast<NoyesGrade>(cat)) : mname;
        txt << "  " << pad(label, 14);
        for (std::size_t r = 0; r < m.readers.size(); ++r) {
          int k = 0, n = 0;
          for (const auto& row : m.categories)
            if (row[r] >= 0) {
              ++n;
              k += row[r] == cat;
            }
          txt << pad("R" + m.readers[r] + " " + std::to_string(k) + "/" + std::to_string(n), 14);
          rec.add("agreement", name, mname, "reader_" + m.readers[r] + "_count_" + std::to_string(cat), k);
        }
        int k = 0;
        for (const auto& [s, c] : cons[mi]) k += c == cat;
        const int n = static_cast<int>(cons[mi].size());
        txt << pad(si == 0 ? "AC2 " + ac2_text : "", 30) << "consensus " << count_pct(k, n) << '\n';
        rec.add("agreement", name, mname, "consensus_count_" + std::to_string(cat), k, count_pct(k, n));
      }
    }

    // Method against HR on consensus values.
    for (int mi = 0; mi < 2; ++mi) {
      std::vector<int> a, b;
      int disc_b = 0, disc_c = 0;
      for (const auto& [s, c] : cons[mi]) {
        const auto it = cons[2].find(s);
        if (it == cons[2].end()) continue;
        a.push_back(c);
        b.push_back(it->second);
        const bool pa = c >= 1, pb = it->second >= 1;
        disc_b += pa && !pb;
        disc_c += !pa && pb;
      }
      if (a.empty()) continue;
      const std::string label = std::string(method_name(kMethods[mi])) + " vs HR";
      const std::string tag = mi == 0 ? "lr_vs_hr" : "sr_vs_hr";
      const auto k = cohen_kappa(a, b, q, scale == Scale::kLikert ? weighting : Weighting::kIdentity);
      txt << "  " << pad(label, 14) << "kappa " << kappa_ci(k);
      rec.add("agreement", name, tag, "kappa", k.kappa, kappa_ci(k));
      rec.add("agreement", name, tag, "kappa_lo", k.ci_lo);
      rec.add("agreement", name, tag, "kappa_hi", k.ci_hi);
      if (scale != Scale::kLikert) {
        const auto mc = mcnemar_test(disc_b, disc_c);
        txt << "  McNemar P " << format_p(mc.p) << " (b=" << disc_b << ", c=" << disc_c << ")";
        rec.add("agreement", name, tag, "mcnemar_p", mc.p, format_p(mc.p));
      }
      txt << '\n';
    }
  }
  if (table.rows.empty()) throw InputError("agreement: empty ratings table");
  txt << "AC2: Gwet agreement among readers with 95% CI. Kappa and McNemar compare consensus readings.\n";
  return {txt.str(), rec.str()};
}

Report diagnostic_report(const std::vector<DiagnosticRow>& rows, int bootstrap_n, std::uint64_t seed) {
  if (rows.empty()) throw InputError("diagnostic: empty table");
  Records rec;
  std::ostringstream txt;
  std::vector<std::optional<NoyesGrade>> ref;
  for (const auto& r : rows) ref.push_back(r.ref);
  const int n_ref = static_cast<int>(std::count_if(ref.begin(), ref.end(), [](const auto& g) { return g.has_value(); }));

  txt << pad("Images", 12) << pad("Prevalence", 16) << pad("MRI frequency", 16) << pad("TN", 5) << pad("TP", 5)
      << pad("FN", 5) << pad("FP", 5) << pad("Sensitivity", 14) << pad("Specificity", 14) << "AUC\n";
  std::array<std::vector<bool>, 3> correct;
  for (int mi = 0; mi < 3; ++mi) {
    const Method method = kMethods[mi];
    const std::string mname = method_name(method);
    std::vector<NoyesGrade> mri;
    for (const auto& r : rows) mri.push_back(r.grade(method));
    const auto res = diagnostic_performance(mri, ref);
    const auto& c = res.counts;

    std::vector<double> scores;
    std::vector<int> pos;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!ref[i]) continue;
      scores.push_back(ordinal(mri[i]));
      pos.push_back(*ref[i] != NoyesGrade::k0);
      correct[mi].push_back((mri[i] != NoyesGrade::k0) == (*ref[i] != NoyesGrade::k0));
    }
    const auto auc = roc_auc(scores, pos, bootstrap_n, seed + static_cast<std::uint64_t>(mi));
    const std::string auc_text = auc.defined ? fmt("%.2f", auc.auc) + " [" + fmt("%.2f", auc.ci.lo) + "," +
                                                   fmt("%.2f", auc.ci.hi) + "]"
                                             : "undefined";

    txt << pad(mname, 12) << pad("", 16) << pad("", 16) << pad(std::to_string(c.tn), 5) << pad(std::to_string(c.tp), 5)
        << pad(std::to_string(c.fn), 5) << pad(std::to_string(c.fp), 5)
        << pad(pct_ci(res.sensitivity, res.sensitivity_ci), 14) << pad(pct_ci(res.specificity, res.specificity_ci), 14)
        << auc_text << '\n';
    for (int g = 0; g < kNoyesCategories; ++g) {
      int prev = 0, freq = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!ref[i]) continue;
        prev += ordinal(*ref[i]) == g;
        freq += ordinal(mri[i]) == g;
      }
      const auto pct = [&](int k) {
        return std::to_string(display_percent(n_ref ? static_cast<double>(k) / n_ref : 0.0)) + " (" +
               std::to_string(k) + "/" + std::to_string(n_ref) + ")";
      };
      txt << pad(std::string("  Grade ") + noyes_token(static_cast<NoyesGrade>(g)), 12) << pad(pct(prev), 16)
          << pct(freq) << '\n';
      rec.add("diagnostic", "cartilage_grade", mname, std::string("prevalence_") + noyes_token(static_cast<NoyesGrade>(g)), prev);
      rec.add("diagnostic", "cartilage_grade", mname, std::string("frequency_") + noyes_token(static_cast<NoyesGrade>(g)), freq);
    }
    rec.add("diagnostic", "cartilage_grade", mname, "tn", c.tn);
    rec.add("diagnostic", "cartilage_grade", mname, "tp", c.tp);
    rec.add("diagnostic", "cartilage_grade", mname, "fn", c.fn);
    rec.add("diagnostic", "cartilage_grade", mname, "fp", c.fp);
    rec.add("diagnostic", "cartilage_grade", mname, "ref_pos", c.ref_pos);
    rec.add("diagnostic", "cartilage_grade", mname, "ref_neg", c.ref_neg);
    rec.add("diagnostic", "cartilage_grade", mname, "sensitivity", res.sensitivity,
            pct_ci(res.sensitivity, res.sensitivity_ci));
    rec.add("diagnostic", "cartilage_grade", mname, "sensitivity_lo", res.sensitivity_ci.lo,
            std::to_string(display_percent(res.sensitivity_ci.lo)));
    rec.add("diagnostic", "cartilage_grade", mname, "sensitivity_hi", res.sensitivity_ci.hi,
            std::to_string(display_percent(res.sensitivity_ci.hi)));
    rec.add("diagnostic", "cartilage_grade", mname, "specificity", res.specificity,
            pct_ci(res.specificity, res.specificity_ci));
    rec.add("diagnostic", "cartilage_grade", mname, "specificity_lo", res.specificity_ci.lo,
            std::to_string(display_percent(res.specificity_ci.lo)));
    rec.add("diagnostic", "cartilage_grade", mname, "specificity_hi", res.specificity_ci.hi,
            std::to_string(display_percent(res.specificity_ci.hi)));
    rec.add("diagnostic", "cartilage_grade", mname, "accuracy", res.accuracy, pct_ci(res.accuracy, res.accuracy_ci));
    rec.add("diagnostic", "cartilage_grade", mname, "auc", auc.auc, auc_text);
    rec.add("diagnostic", "cartilage_grade", mname, "auc_lo", auc.ci.lo);
    rec.add("diagnostic", "cartilage_grade", mname, "auc_hi", auc.ci.hi);
    rec.add("diagnostic", "cartilage_grade", mname, "counts_inconsistent", res.counts_inconsistent ? 1 : 0);
    if (res.counts_inconsistent) {
      txt << "  note: " << mname << " TP+FN=" << c.tp + c.fn << " vs " << c.ref_pos << " reference positives, TN+FP="
          << c.tn + c.fp << " vs " << c.ref_neg << " reference negatives (grade-confusion rule)\n";
    }
  }
  // Paired correctness of LR and SR against HR.
  for (int mi = 0; mi < 2; ++mi) {
    int b = 0, c = 0;
    for (std::size_t i = 0; i < correct[mi].size(); ++i) {
      b += correct[mi][i] && !correct[2][i];
      c += !correct[mi][i] && correct[2][i];
    }
    const auto mc = mcnemar_test(b, c);
    const std::string tag = mi == 0 ? "lr_vs_hr" : "sr_vs_hr";
    txt << method_name(kMethods[mi]) << " vs HR detection: McNemar P " << format_p(mc.p) << '\n';
    rec.add("diagnostic", "cartilage_grade", tag, "mcnemar_p", mc.p, format_p(mc.p));
  }
  const int excluded = static_cast<int>(rows.size()) - n_ref;
  if (excluded > 0) txt << "warning: " << excluded << " compartment(s) without a reference grade were excluded\n";
  rec.add("diagnostic", "cartilage_grade", "all", "excluded", excluded);
  txt << "Sensitivity and specificity in percent with 95% Wilson intervals; AUC with bootstrap 95% CI.\n";
  return {txt.str(), rec.str()};
}

}  // namespace hatsr::stats
