#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hatsr/error.hpp"
#include "hatsr/stats/agreement.hpp"
#include "hatsr/stats/diagnostic.hpp"
#include "hatsr/stats/ratings.hpp"
#include "hatsr/stats/report.hpp"
#include "hatsr/stats/tests.hpp"

using namespace hatsr;
using namespace hatsr::stats;
using doctest::Approx;

TEST_CASE("agreement weights") {
  const auto lin = agreement_weights(5, Weighting::kLinear);
  CHECK(lin[0][4] == 0.0);
  CHECK(lin[1][2] == Approx(0.75));
  const auto quad = agreement_weights(5, Weighting::kQuadratic);
  CHECK(quad[0][2] == Approx(0.75));
  const auto id = agreement_weights(3, Weighting::kIdentity);
  CHECK(id[1][1] == 1.0);
  CHECK(id[0][1] == 0.0);
}

TEST_CASE("Gwet AC2 on a two-rater binary table") {
  // Hand-computed: pa = 0.8, pi = (0.4, 0.6), pe = 2 * 0.4 * 0.6 = 0.48.
  const std::vector<std::vector<int>> m = {{0, 0}, {0, 0}, {0, 0}, {1, 1}, {1, 1},
                                           {1, 1}, {1, 1}, {1, 1}, {0, 1}, {1, 0}};
  const auto r = gwet_ac2(m, 2, Weighting::kIdentity);
  CHECK(r.pa == Approx(0.8));
  CHECK(r.pe == Approx(0.48));
  CHECK(r.coefficient == Approx((0.8 - 0.48) / 0.52));
  CHECK(r.ci_lo < r.coefficient);
  CHECK(r.ci_hi <= 1.0);
}

TEST_CASE("Gwet AC2 is 1 for unanimous readers and skips single ratings") {
  const std::vector<std::vector<int>> m = {{2, 2, 2}, {0, 0, 0}, {4, 4, -1}, {1, -1, -1}};
  const auto r = gwet_ac2(m, 5, Weighting::kLinear);
  CHECK(r.coefficient == Approx(1.0));
  CHECK(r.subjects == 4);
}

TEST_CASE("Cohen kappa") {
  const std::vector<int> a = {0, 0, 1, 1, 0, 1, 0, 1};
  CHECK(cohen_kappa(a, a, 2).kappa == Approx(1.0));
  const std::vector<int> b = {0, 1, 1, 1, 0, 0, 0, 1};
  const auto k = cohen_kappa(a, b, 2);
  CHECK(k.po == Approx(0.75));
  CHECK(k.pe == Approx(0.5));
  CHECK(k.kappa == Approx(0.5));
  CHECK_FALSE(cohen_kappa({0, 0, 0}, {0, 0, 0}, 2).defined);
}

TEST_CASE("midranks average ties") {
  const auto r = midranks({3, 1, 3, 2});
  CHECK(r == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("Friedman test") {
  SUBCASE("identical columns give p = 1") {
    const auto r = friedman_test({{1, 1, 1}, {3, 3, 3}, {2, 2, 2}});
    CHECK(r.statistic == 0.0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("consistent ordering") {
    const std::vector<std::vector<double>> s(6, {1, 2, 3});
    const auto r = friedman_test(s);
    CHECK(r.exact);
    CHECK(r.statistic == Approx(12.0));
    // The statistic is maximal; 6 of the 6^6 assignments (one per common
    // permutation) attain it.
    CHECK(r.p == Approx(6.0 / 46656.0));
    CHECK(r.p_asymptotic == Approx(std::exp(-6.0)));
  }
  SUBCASE("falls back to chi-square when enumeration is too large") {
    const std::vector<std::vector<double>> s(10, {1, 2, 3});
    const auto r = friedman_test(s, 1);
    CHECK_FALSE(r.exact);
    CHECK(r.p == r.p_asymptotic);
  }
}

TEST_CASE("Wilcoxon signed-rank test") {
  SUBCASE("exact small sample") {
    const auto r = wilcoxon_signed_rank({1, 2, 3, 4, 5}, {0, 0, 0, 0, 0});
    CHECK(r.exact);
    CHECK(r.statistic == 15.0);
    CHECK(r.p == Approx(2.0 / 32.0));
  }
  SUBCASE("all zero differences") {
    const auto r = wilcoxon_signed_rank({1, 2}, {1, 2});
    CHECK(r.n_nonzero == 0);
    CHECK(r.p == 1.0);
  }
  SUBCASE("ties use the normal approximation") {
    const auto r = wilcoxon_signed_rank({2, 2, 2, 3, 1}, {1, 1, 1, 1, 2});
    CHECK_FALSE(r.exact);
    CHECK(r.p > 0.0);
    CHECK(r.p < 1.0);
  }
  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2}, {1}), InputError);
}

TEST_CASE("Holm adjustment") {
  const auto adj = holm_adjust({0.01, 0.04, 0.03});
  CHECK(adj[0] == Approx(0.03));
  CHECK(adj[2] == Approx(0.06));
  CHECK(adj[1] == Approx(0.06));
  CHECK(holm_adjust({0.6, 0.9})[1] == 1.0);
}

TEST_CASE("McNemar test") {
  CHECK(mcnemar_test(0, 0).p == 1.0);
  CHECK(mcnemar_test(8, 1).p == Approx(20.0 / 512.0));
  const auto big = mcnemar_test(20, 10);
  CHECK_FALSE(big.exact);
  CHECK(big.statistic == Approx(81.0 / 30.0));
}

TEST_CASE("Wilson interval") {
  const auto ci = wilson_ci(8, 13);
  CHECK(ci.lo == Approx(0.355228915126657).epsilon(1e-12));
  CHECK(ci.hi == Approx(0.8229029220223743).epsilon(1e-12));
  CHECK(wilson_ci(0, 5).lo == 0.0);
  CHECK(wilson_ci(5, 5).hi == Approx(1.0));
  CHECK_THROWS_AS(wilson_ci(3, 2), InputError);
  CHECK_THROWS_AS(wilson_ci(0, 0), InputError);
}

TEST_CASE("diagnostic counting rules") {
  using G = NoyesGrade;
  const std::vector<std::optional<G>> ref = {G::k0, G::k0, G::k1, G::k3, G::k2B, std::nullopt};
  const std::vector<G> mri = {G::k0, G::k1, G::k1, G::k2B, G::k3, G::k2A};
  int excluded = 0;
  const auto c = count_findings(mri, ref, &excluded);
  CHECK(excluded == 1);
  CHECK(c.ref_pos == 3);
  CHECK(c.ref_neg == 2);
  CHECK(c.tn == 1);
  CHECK(c.tp == 1);
  CHECK(c.fp == 2);  // one false alarm plus the 3 read as 2B
  CHECK(c.fn == 1);  // the 2B read as 3
  CHECK(c.inconsistent());
}

TEST_CASE("AUC and bootstrap") {
  CHECK(auc_mann_whitney({1, 2, 3, 4}, {0, 0, 1, 1}) == 1.0);
  CHECK(auc_mann_whitney({1, 1, 1, 1}, {0, 1, 0, 1}) == 0.5);
  CHECK(std::isnan(auc_mann_whitney({1, 2}, {1, 1})));
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8, 0.7, 0.2, 0.9, 0.5};
  const std::vector<int> p = {0, 0, 1, 1, 1, 0, 1, 0};
  const auto a = roc_auc(s, p, 500, 3);
  const auto b = roc_auc(s, p, 500, 3);
  CHECK(a.auc == Approx(0.875));
  CHECK(a.ci.lo == b.ci.lo);
  CHECK(a.ci.hi == b.ci.hi);
  CHECK(a.ci.lo <= a.auc);
  CHECK(a.ci.hi >= a.auc);
  CHECK_FALSE(roc_auc({1, 2}, {0, 0}, 10).defined);
}

TEST_CASE("consensus of three readers") {
  CHECK(consensus({2, 2, 4}) == 2);
  CHECK(consensus({0, 3, 1}) == 1);
  CHECK_THROWS_AS(consensus({1, 2}), InputError);
}

TEST_CASE("display helpers") {
  CHECK(format_p(0.0004) == "< 0.001");
  CHECK(format_p(1.0) == "> 0.99");
  CHECK(format_p(0.0390625) == "0.039");
  CHECK(display_percent(46.0 / 47.0) == 98);
  CHECK(display_percent(0.9962) == 99);
  CHECK(display_percent(0.003) == 1);
  CHECK(display_percent(1.0) == 100);
  CHECK(display_percent(0.0) == 0);
}

TEST_CASE("ratings reader") {
  std::istringstream ok(
      "case_id,side,reader_id,method,item,value\n"
      "c1,L,r1,LR,image_quality,4\n"
      "c1,L,r1,SR,cartilage_grade,2B\n"
      "c1,L,r1,HR,meniscus_tear,present\n");
  const auto t = read_ratings(ok);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].category == 3);
  CHECK(t.rows[2].category == 1);

  std::istringstream tabs("case_id\tside\treader_id\tmethod\titem\tvalue\nc1\tR\tr2\thr\tnoise\t1\n");
  CHECK(read_ratings(tabs).rows.size() == 1);

  std::istringstream bad_header("case,side\n");
  CHECK_THROWS_AS(read_ratings(bad_header), SchemaError);

  std::istringstream bad_rows(
      "case_id,side,reader_id,method,item,value\n"
      "c1,L,r1,XR,image_quality,4\n"
      "c1,L,r1,LR,image_quality,9\n"
      "c1,L,r1,LR,bogus,1\n");
  try {
    read_ratings(bad_rows);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.rows().size() == 3);
  }

  std::istringstream dup(
      "case_id,side,reader_id,method,item,value\n"
      "c1,L,r1,LR,noise,4\n"
      "c1,L,r1,LR,noise,3\n");
  CHECK_THROWS_AS(read_ratings(dup), SchemaError);
}

TEST_CASE("diagnostic table reader accepts a missing reference") {
  std::istringstream in(
      "case_id,compartment,ref_grade,lr_grade,sr_grade,hr_grade\n"
      "c1,MFC,2A,1,2A,2A\n"
      "c2,LFC,NA,0,0,0\n"
      "c3,MT,,0,0,1\n");
  const auto rows = read_diagnostic(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ref == NoyesGrade::k2A);
  CHECK(rows[0].grade(Method::kLR) == NoyesGrade::k1);
  CHECK_FALSE(rows[1].ref.has_value());
  CHECK_FALSE(rows[2].ref.has_value());
}

TEST_CASE("reports carry both renderings") {
  std::ostringstream csv;
  csv << "case_id,side,reader_id,method,item,value\n";
  for (int c = 0; c < 5; ++c)
    for (const char* r : {"r1", "r2", "r3"})
      for (const char* m : {"LR", "SR", "HR"})
        csv << "k" << c << ",R," << r << "," << m << ",image_quality," << (1 + (c + (m[0] == 'L')) % 5) << "\n";
  std::istringstream in(csv.str());
  const auto table = read_ratings(in);
  const auto cmp = compare_report(table);
  CHECK(cmp.text.find("image_quality") != std::string::npos);
  CHECK(cmp.tsv.rfind("section\titem\tmethod\tmetric\tvalue\tdisplay\n", 0) == 0);
  CHECK(cmp.tsv.find("lr_vs_sr") != std::string::npos);
  const auto agr = agreement_report(table);
  CHECK(agr.tsv.find("\tac2\t") != std::string::npos);
}
