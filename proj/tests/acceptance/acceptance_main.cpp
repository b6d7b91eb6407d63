// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. `--only N` runs a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hatsr/attention.hpp"
#include "hatsr/nn/network.hpp"
#include "hatsr/ops.hpp"
#include "hatsr/phantom/degrade.hpp"
#include "hatsr/stats/agreement.hpp"
#include "hatsr/stats/diagnostic.hpp"
#include "hatsr/stats/report.hpp"
#include "hatsr/stats/tests.hpp"
#include "hatsr/train/dataset.hpp"
#include "hatsr/train/gradcheck.hpp"
#include "hatsr/train/trainer.hpp"
#include "oracles.hpp"

using namespace hatsr;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED(" << what << ")";
    }
  }
};

// ---------------------------------------------------------------------------

Outcome detection_table() {
  Outcome o;
  struct Row {
    const char* name;
    stats::DiagnosticCounts c;
    int sens, sens_lo, sens_hi, spec, spec_lo, spec_hi;
  };
  const Row rows[] = {
      {"LR", {8, 46, 5, 1, 13, 47}, 62, 36, 82, 98, 89, 99},
      {"SR", {9, 46, 4, 1, 13, 47}, 69, 42, 87, 98, 89, 99},
      {"HR", {9, 45, 4, 2, 13, 47}, 69, 42, 87, 96, 86, 99},
  };
  for (const auto& r : rows) {
    const auto res = stats::diagnostic_performance(r.c);
    const auto dp = stats::display_percent;
    const int got[] = {dp(res.sensitivity), dp(res.sensitivity_ci.lo), dp(res.sensitivity_ci.hi),
                       dp(res.specificity), dp(res.specificity_ci.lo), dp(res.specificity_ci.hi)};
    const int want[] = {r.sens, r.sens_lo, r.sens_hi, r.spec, r.spec_lo, r.spec_hi};
    for (int i = 0; i < 6; ++i) o.require(got[i] == want[i], std::string(r.name) + " column " + std::to_string(i));

    const auto [slo, shi] = oracle::wilson(r.c.tp, r.c.ref_pos);
    const auto [plo, phi] = oracle::wilson(r.c.tn, r.c.ref_neg);
    o.require(std::abs(res.sensitivity_ci.lo - slo) < 1e-12 && std::abs(res.sensitivity_ci.hi - shi) < 1e-12,
              std::string(r.name) + " sensitivity Wilson closed form");
    o.require(std::abs(res.specificity_ci.lo - plo) < 1e-12 && std::abs(res.specificity_ci.hi - phi) < 1e-12,
              std::string(r.name) + " specificity Wilson closed form");
    char buf[200];
    std::snprintf(buf, sizeof buf, " %s sens %d [%d,%d] (raw %.2f [%.2f,%.2f]) spec %d [%d,%d] (raw %.2f [%.2f,%.2f]);",
                  r.name, got[0], got[1], got[2], 100 * res.sensitivity, 100 * res.sensitivity_ci.lo,
                  100 * res.sensitivity_ci.hi, got[3], got[4], got[5], 100 * res.specificity,
                  100 * res.specificity_ci.lo, 100 * res.specificity_ci.hi);
    o.detail << buf;
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome mcnemar() {
  Outcome o;
  const double p00 = stats::mcnemar_exact(0, 0);
  const double p10 = stats::mcnemar_exact(1, 0);
  const double p81 = stats::mcnemar_exact(8, 1);
  o.require(p00 == 1.0, "b=c=0 gives p=1");
  o.require(stats::format_p(p00) == "> 0.99", "b=c=0 prints > 0.99");
  o.require(std::abs(p10 - 2.0 * 1 * 0.5) < 1e-12, "(1,0)");
  o.require(std::abs(p81 - 2.0 * (1 + 9) / 512.0) < 1e-12, "(8,1)");
  o.require(stats::mcnemar_exact(1, 8) == p81, "symmetry");
  for (int b = 0; b < 13; ++b)
    for (int c = 0; b + c < 25; ++c)
      o.require(std::abs(stats::mcnemar_exact(b, c) - oracle::binomial_two_sided(b, c)) < 1e-12,
                "binomial oracle at " + std::to_string(b) + "," + std::to_string(c));
  char buf[120];
  std::snprintf(buf, sizeof buf, " p(0,0)=%.3g p(1,0)=%.17g p(8,1)=%.17g (20/512=%.17g)", p00, p10, p81, 20.0 / 512);
  o.detail << buf;
  return o;
}

// ---------------------------------------------------------------------------

Outcome stats_oracles() {
  Outcome o;
  std::mt19937_64 rng(20240607);
  constexpr int kTables = 25;
  double ac2_err = 0, kappa_err = 0, auc_err = 0, friedman_err = 0, wilcoxon_err = 0;
  int holm_mismatch = 0;
  const stats::Weighting weightings[] = {stats::Weighting::kIdentity, stats::Weighting::kLinear,
                                         stats::Weighting::kQuadratic};

  for (int t = 0; t < kTables; ++t) {
    const int n = 3 + static_cast<int>(rng() % 6);  // 3..8 cases
    const int q = 2 + static_cast<int>(rng() % 4);
    const int raters = 2 + static_cast<int>(rng() % 3);
    const int kind = t % 3;

    // AC2, with an occasional missing rating.
    std::vector<std::vector<int>> m(n, std::vector<int>(raters));
    for (auto& row : m)
      for (auto& c : row) c = static_cast<int>(rng() % q);
    if (t % 4 == 0) m[0][raters - 1] = -1;
    bool varied = false;
    for (const auto& row : m)
      for (int c : row) varied |= c >= 0 && c != m[0][0];
    if (varied) {
      const auto ac2 = stats::gwet_ac2(m, q, weightings[kind]);
      ac2_err = std::max(ac2_err, std::abs(ac2.coefficient - oracle::gwet_ac2(m, q, kind)));
    }

    // Kappa.
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % q);
      b[i] = rng() % 3 == 0 ? static_cast<int>(rng() % q) : a[i];
    }
    const auto k = stats::cohen_kappa(a, b, q, weightings[kind]);
    if (k.defined) kappa_err = std::max(kappa_err, std::abs(k.kappa - oracle::cohen_kappa(a, b, q, kind)));

    // AUC on ordinal scores with ties.
    std::vector<double> s(n);
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) {
      pos[i] = i % 2;
      s[i] = static_cast<double>(rng() % 5) + pos[i] * static_cast<double>(rng() % 2);
    }
    auc_err = std::max(auc_err, std::abs(stats::auc_mann_whitney(s, pos) - oracle::auc(s, pos)));

    // Friedman: small integer scores with ties, up to 6 cases of 3 methods.
    const int fn = 3 + t % 4;
    std::vector<std::vector<double>> f(fn, std::vector<double>(3));
    for (auto& row : f)
      for (auto& v : row) v = static_cast<double>(rng() % 4);
    const auto fr = stats::friedman_test(f);
    friedman_err = std::max(friedman_err, std::abs(fr.p - oracle::friedman_permutation_p(f)));
    friedman_err = std::max(friedman_err, std::abs(fr.statistic - oracle::friedman_statistic(f)));

    // Wilcoxon: continuous differences take the exact path, rounded ones the
    // tie/zero-aware normal path.
    std::vector<double> x(n), y(n), d(n), xr(n + 4), yr(n + 4), dr(n + 4);
    for (int i = 0; i < n; ++i) {
      x[i] = std::normal_distribution<double>(0.3, 1.0)(rng);
      y[i] = std::normal_distribution<double>(0.0, 1.0)(rng);
      d[i] = x[i] - y[i];
    }
    wilcoxon_err = std::max(wilcoxon_err, std::abs(stats::wilcoxon_signed_rank(x, y).p - oracle::wilcoxon_exact_p(d)));
    for (int i = 0; i < n + 4; ++i) {
      xr[i] = static_cast<double>(rng() % 5);
      yr[i] = static_cast<double>(rng() % 4);
      dr[i] = xr[i] - yr[i];
    }
    const auto wr = stats::wilcoxon_signed_rank(xr, yr);
    if (!wr.exact) wilcoxon_err = std::max(wilcoxon_err, std::abs(wr.p - oracle::wilcoxon_normal_p(dr)));

    // Holm on random p vectors.
    std::vector<double> p(2 + rng() % 5);
    for (auto& v : p) v = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
    if (stats::holm_adjust(p) != oracle::holm(p)) ++holm_mismatch;
  }

  const auto hand = stats::holm_adjust({0.01, 0.04, 0.03});
  o.require(hand == std::vector<double>{3 * 0.01, std::max(1 * 0.04, 2 * 0.03), 2 * 0.03}, "Holm hand example");
  const std::vector<double> d10 = {1, 1, 2, -1, 3, 2, 2, -3, 1, 4};
  const auto w10 = stats::wilcoxon_signed_rank(d10, std::vector<double>(10, 0.0));
  o.require(std::abs(w10.p - 0.09955968187174137) < 1e-12, "tied normal approximation reference value");

  o.require(ac2_err < 1e-10, "AC2");
  o.require(kappa_err < 1e-10, "kappa");
  o.require(auc_err < 1e-10, "AUC");
  o.require(friedman_err < 0.02, "Friedman");
  o.require(wilcoxon_err < 1e-10, "Wilcoxon");
  o.require(holm_mismatch == 0, "Holm");
  char buf[240];
  std::snprintf(buf, sizeof buf,
                " %d tables: max|dAC2|=%.1e max|dkappa|=%.1e max|dAUC|=%.1e max|dFriedman|=%.1e "
                "max|dWilcoxon|=%.1e Holm mismatches=%d",
                kTables, ac2_err, kappa_err, auc_err, friedman_err, wilcoxon_err, holm_mismatch);
  o.detail << buf;
  return o;
}

// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  Tensor<T> t(shape);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.values()) v = static_cast<T>(u(rng));
  return t;
}

Outcome structure() {
  Outcome o;
  std::mt19937_64 rng(11);
  nn::ModelConfig cfg;
  cfg.feat_channels = 12;
  cfg.num_rhag = 1;
  cfg.habs_per_rhag = 2;
  cfg.num_heads = 2;
  cfg.cbam_reduction = 4;
  cfg.window_size = 8;
  cfg.validate();

  const auto x = random_tensor<float>({1, 16, 16, cfg.feat_channels}, rng);
  const nn::ModelWeights<float> zero(cfg);
  {
    ag::Graph<float> g(false);
    nn::Scope<float> s(g, zero);
    const auto xv = g.constant(x);
    o.require(nn::hab_forward(s, "layers.0.blocks.0", xv, false).value() == x, "HAB identity");
    o.require(nn::hab_forward(s, "layers.0.blocks.1", xv, true).value() == x, "shifted HAB identity");
    o.require(nn::ocab_forward(s, "layers.0.ocab", xv).value() == x, "OCAB identity");
  }
  {
    // Dense random group, zero closing convolution.
    auto w = train::dense_random_weights(cfg, 3).cast<float>();
    for (auto& e : w)
      if (e.name.rfind("layers.0.conv", 0) == 0) e.tensor.fill(0.0f);
    ag::Graph<float> g(false);
    nn::Scope<float> s(g, w);
    o.require(nn::rhag_forward(s, 0, g.constant(x)).value() == x, "RHAG identity");
  }
  {
    auto w = train::dense_random_weights(cfg, 4).cast<float>();
    for (auto& e : w)
      if (e.name.rfind("deep.conv", 0) == 0) e.tensor.fill(0.0f);
    ag::Graph<float> g(false);
    nn::Scope<float> s(g, w);
    const auto img = g.constant(random_tensor<float>({1, 16, 16, 1}, rng, 0, 1));
    const auto f0 = nn::shallow_extract(s, img);
    const auto fdf = nn::deep_extract(s, f0);
    o.require(ag::add(f0, fdf).value() == f0.value(), "global residual identity");
  }

  // Attention rows.
  double worst_row = 0;
  const int C = 8, heads = 2;
  for (int shift : {0, 2}) {
    const auto qkv = random_tensor<float>({2, 8, 12, 3 * C}, rng, -3, 3);
    const auto table = random_tensor<float>({(2 * 4 - 1) * (2 * 4 - 1), heads}, rng);
    const auto p = ag::window_attention_probs(qkv, table, heads, 4, shift);
    const auto m = p.dim(4);
    for (std::size_t r = 0; r < p.size() / m; ++r) {
      double s = 0;
      for (std::int64_t j = 0; j < m; ++j) s += p[r * m + j];
      worst_row = std::max(worst_row, std::abs(s - 1.0));
    }
  }
  {
    const auto qkv = random_tensor<float>({1, 8, 8, 3 * C}, rng, -3, 3);
    const auto table = random_tensor<float>({(4 + 6 - 1) * (4 + 6 - 1), heads}, rng);
    const auto p = ag::overlap_attention_probs(qkv, table, heads, 4, 6);
    const auto m = p.dim(4);
    for (std::size_t r = 0; r < p.size() / m; ++r) {
      double s = 0;
      for (std::int64_t j = 0; j < m; ++j) s += p[r * m + j];
      worst_row = std::max(worst_row, std::abs(s - 1.0));
    }
  }
  o.require(worst_row <= 1e-6, "attention rows sum to 1");

  // Output extents on a reduced-width model and on the full default model.
  nn::ModelConfig shape_cfg = cfg;
  shape_cfg.window_size = 16;
  const auto shape_w = nn::initialize_weights<float>(shape_cfg, 5);
  int shapes_ok = 0, shapes = 0;
  for (int h : {48, 96, 192})
    for (int w : {48, 96, 192}) {
      const auto out = nn::super_resolve(shape_w, Tensor<float>({1, h, w, 1}, 0.5f));
      ++shapes;
      shapes_ok += out.shape() == Shape{1, 2 * h, 2 * w, 1};
    }
  o.require(shapes_ok == shapes, "reduced model output extents");
  const auto t0 = std::chrono::steady_clock::now();
  const auto full = nn::initialize_weights<float>(nn::ModelConfig{}, 6);
  const auto full_out = nn::super_resolve(full, random_tensor<float>({1, 48, 48, 1}, rng, 0, 1));
  const double full_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(full_out.shape() == Shape{1, 96, 96, 1}, "default model 48 -> 96");

  char buf[200];
  std::snprintf(buf, sizeof buf,
                " identities HAB/OCAB/RHAG/global bit-exact; max|row sum - 1|=%.1e; %d/%d extents doubled; "
                "default model (%zu params) 48x48 in %.1fs",
                worst_row, shapes_ok, shapes, full.parameter_count(), full_s);
  o.detail << buf;
  return o;
}

// ---------------------------------------------------------------------------

Outcome gradcheck() {
  Outcome o;
  train::GradCheckOptions opt;
  opt.samples_per_tensor = 0;
  opt.seed = 42;
  const auto rep = train::gradient_check(nn::toy_config(), 16, opt);
  const auto manifest = nn::parameter_manifest(nn::toy_config());
  std::size_t checked = 0, below = 0;
  std::string worst;
  double worst_err = -1;
  for (const auto& e : rep.entries) {
    checked += e.checked;
    below += e.below_floor;
    if (e.max_rel_error > worst_err) {
      worst_err = e.max_rel_error;
      worst = e.name;
    }
  }
  o.require(rep.entries.size() == manifest.size(), "covers the manifest");
  o.require(rep.passed(1e-4), "max relative error <= 1e-4");
  char buf[200];
  std::snprintf(buf, sizeof buf, " %zu tensors, %zu entries (%zu with |grad| < 1e-6), max rel error %.2e (%s)",
                rep.entries.size(), checked, below, rep.max_rel_error, worst.c_str());
  o.detail << buf;
  return o;
}

// ---------------------------------------------------------------------------

Outcome training() {
  Outcome o;
  phantom::DegradationConfig dcfg;
  const auto base = phantom::default_knee_spec(128);
  auto train_set = phantom::make_paired_dataset(4, base, dcfg, 101);
  const auto held_out = phantom::make_paired_dataset(4, base, dcfg, 202);

  nn::ModelConfig mcfg;
  mcfg.feat_channels = 16;
  mcfg.num_rhag = 1;
  mcfg.habs_per_rhag = 2;
  mcfg.window_size = 8;
  mcfg.num_heads = 2;
  mcfg.cbam_reduction = 4;
  mcfg.cbam_spatial_kernel = 7;

  train::TrainConfig tcfg;
  tcfg.patch_size = 32;
  tcfg.batch_size = 4;
  tcfg.steps = 2000;
  tcfg.schedule.base = 1e-3;
  tcfg.seed = 7;
  tcfg.log_every = 100;
  if (const char* s = std::getenv("HATSR_ACCEPT_TRAIN_STEPS")) tcfg.steps = std::atoi(s);

  const auto result = train::train(train_set, mcfg, tcfg, [](const train::LossRecord& r) {
    std::fprintf(stderr, "  step %5d  mse %.3e\n", r.step, r.mse);
  });
  std::vector<std::size_t> all = {0, 1, 2, 3};
  const auto eval = train::evaluate(result.weights, held_out, all);
  const double ratio = result.report.initial_train_mse / result.report.final_train_mse;
  const double gain = eval.mean_psnr_sr() - eval.mean_psnr_bicubic();
  o.require(ratio >= 100.0, "training MSE reduced 100x");
  o.require(gain >= 1.0, "held-out PSNR gain over bicubic >= 1 dB");
  char buf[240];
  std::snprintf(buf, sizeof buf,
                " train MSE %.3e -> %.3e (x%.0f) in %d steps, %.0fs; held-out PSNR SR %.2f dB vs bicubic %.2f dB "
                "(+%.2f)",
                result.report.initial_train_mse, result.report.final_train_mse, ratio, tcfg.steps,
                result.report.seconds, eval.mean_psnr_sr(), eval.mean_psnr_bicubic(), gain);
  o.detail << buf;
  return o;
}

// ---------------------------------------------------------------------------

Outcome degradation() {
  Outcome o;
  const int n = 64;
  double const_err = 0, sine_err = 0;
  for (int f : {1, 2, 4})
    for (bool keep : {false, true}) {
      phantom::DegradationConfig cfg{f, 0.0, keep};
      const auto out = phantom::kspace_truncate(Image2D(n, n, 1.0, 0.37), cfg);
      for (double v : out.data) const_err = std::max(const_err, std::abs(v - 0.37));
    }
  {
    Image2D img(n, n);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        img(y, x) = 0.5 + 0.3 * std::cos(2 * std::numbers::pi * (5.0 * y + 11.0 * x) / n + 0.4) +
                    0.1 * std::sin(2 * std::numbers::pi * (-7.0 * y + 3.0 * x) / n);
    for (bool keep : {false, true}) {
      const auto out = phantom::kspace_truncate(img, {2, 0.0, keep});
      const int step = keep ? 1 : 2;
      for (std::int64_t y = 0; y < out.height; ++y)
        for (std::int64_t x = 0; x < out.width; ++x)
          sine_err = std::max(sine_err, std::abs(out(y, x) - img(y * step, x * step)));
    }
  }
  o.require(const_err < 1e-12, "constant fixed point");
  o.require(sine_err < 1e-10, "in-band sinusoid");

  // Step edge along x, constant along y.
  const int N = 128;
  Image2D step(16, N);
  std::vector<double> row(N);
  for (int x = 0; x < N; ++x) row[x] = x >= N / 4 && x < 3 * N / 4 ? 1.0 : 0.0;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < N; ++x) step(y, x) = row[x];
  double oracle_err = 0;
  std::vector<double> overshoot;
  for (int f : {8, 4, 2, 1}) {
    const auto out = phantom::kspace_truncate(step, {f, 0.0, true});
    const auto ref = oracle::dirichlet_partial_sum(row, N / f);
    double peak = 0;
    for (std::int64_t y = 0; y < out.height; ++y)
      for (int x = 0; x < N; ++x) {
        oracle_err = std::max(oracle_err, std::abs(out(y, x) - ref[x]));
        peak = std::max(peak, out(y, x));
      }
    overshoot.push_back(peak - 1.0);
  }
  const bool decreasing = overshoot[0] > overshoot[1] && overshoot[1] > overshoot[2] && overshoot[2] > overshoot[3];
  o.require(overshoot[2] > 0, "positive overshoot at factor 2");
  o.require(decreasing, "overshoot shrinks as the band widens");
  o.require(oracle_err < 1e-8, "Dirichlet oracle");

  const int side = 320;
  const double sigma = 0.1;
  const auto noisy = phantom::add_rician_noise(Image2D(side, side), sigma, 99);
  double mean = 0;
  for (double v : noisy.data) mean += v;
  mean /= noisy.size();
  const double expected = sigma * std::sqrt(std::numbers::pi / 2);
  const double se = sigma * std::sqrt((4 - std::numbers::pi) / 2) / std::sqrt(static_cast<double>(noisy.size()));
  o.require(std::abs(mean - expected) < 3 * se, "Rayleigh mean");

  char buf[300];
  std::snprintf(buf, sizeof buf,
                " const err %.1e; sinusoid err %.1e; overshoot f8/4/2/1 = %.4f/%.4f/%.4f/%.4f, oracle err %.1e; "
                "Rician mean %.5f vs %.5f (%.2f SE, n=%zu)",
                const_err, sine_err, overshoot[0], overshoot[1], overshoot[2], overshoot[3], oracle_err, mean, expected,
                std::abs(mean - expected) / se, noisy.size());
  o.detail << buf;
  return o;
}

// ---------------------------------------------------------------------------

Outcome split_policy() {
  Outcome o;
  int ok = 0;
  constexpr int kSeeds = 100;
  for (int seed = 0; seed < kSeeds; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919 + 1);
    // 42 subjects: 12 bilateral, 30 unilateral; 10 surgical pairs drawn from
    // 8 subjects (2 bilateral, 6 unilateral).
    std::vector<int> subjects(42);
    for (int i = 0; i < 42; ++i) subjects[i] = i;
    std::shuffle(subjects.begin(), subjects.end(), rng);
    train::PairedDataset ds;
    ds.scale = 2;
    std::set<int> surgical;
    for (int i = 0; i < 2; ++i) surgical.insert(subjects[i]);       // bilateral
    for (int i = 12; i < 18; ++i) surgical.insert(subjects[i]);     // unilateral
    for (int i = 0; i < 42; ++i) {
      const int sid = subjects[i];
      const int knees = i < 12 ? 2 : 1;
      for (int k = 0; k < knees; ++k) {
        train::ImagePair p;
        p.lr = Image2D(2, 2);
        p.hr = Image2D(4, 4);
        p.subject_id = "S" + std::to_string(sid);
        p.knee_side = k == 0 ? "R" : "L";
        p.surgical_reference = surgical.count(sid) > 0;
        ds.pairs.push_back(std::move(p));
      }
    }
    std::shuffle(ds.pairs.begin(), ds.pairs.end(), rng);
    int n_surgical = 0;
    for (const auto& p : ds.pairs) n_surgical += p.surgical_reference;

    train::SplitPolicy policy;
    policy.seed = static_cast<std::uint64_t>(seed);
    const auto out = train::split_dataset(ds, policy);
    const auto tr = out.indices(train::Split::kTrain), te = out.indices(train::Split::kTest);
    std::set<std::string> train_ids, test_ids;
    bool surgical_in_test = true;
    for (auto i : tr) {
      train_ids.insert(out.pairs[i].subject_id);
      surgical_in_test &= !out.pairs[i].surgical_reference;
    }
    for (auto i : te) test_ids.insert(out.pairs[i].subject_id);
    bool disjoint = true;
    for (const auto& id : train_ids) disjoint &= test_ids.count(id) == 0;
    const bool good = ds.pairs.size() == 54 && n_surgical == 10 && tr.size() == 24 && te.size() == 30 &&
                      surgical_in_test && disjoint;
    ok += good;
  }
  o.require(ok == kSeeds, "all seeds");
  o.detail << " " << ok << "/" << kSeeds << " seeds gave 24/30, surgical pairs in test, subject-disjoint";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const std::vector<Criterion> criteria = {
      {1, "lesion detection table", detection_table},
      {2, "McNemar exact test", mcnemar},
      {3, "statistics oracle suite", stats_oracles},
      {4, "network structural invariants", structure},
      {5, "gradient check", gradcheck},
      {6, "training smoke test", training},
      {7, "degradation physics", degradation},
      {8, "split policy", split_policy},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d %s (%.1fs):%s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.str().c_str());
    std::fflush(stdout);
    failures += !out.pass;
  }
  return failures == 0 ? 0 : 1;
}
