// hatsr: phantom generation, degradation, training, inference, evaluation
// and reader statistics from one command line.
//
// Exit codes: 0 success, 2 input or configuration error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hatsr/error.hpp"
#include "hatsr/io/raw_image.hpp"
#include "hatsr/io/run_config.hpp"
#include "hatsr/nn/network.hpp"
#include "hatsr/phantom/degrade.hpp"
#include "hatsr/stats/report.hpp"
#include "hatsr/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace hatsr;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "hatsr-out";
};

// Config file first, then flags.
io::RunConfig resolve(const Globals& g) {
  io::RunConfig cfg = g.config.empty() ? io::RunConfig{} : io::load_run_config(g.config);
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.train.seed = *g.seed;
    cfg.split.seed = *g.seed;
  }
  return cfg;
}

fs::path prepare_out(const Globals& g, const io::RunConfig& cfg) {
  const fs::path dir = g.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
  io::write_resolved_config(dir, cfg);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InputError("cannot write " + path.string());
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing ") + what);
  if (!fs::exists(path)) throw InputError(std::string(what) + " not found: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hatsr: hybrid attention super-resolution toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "Seed for every stage (overrides the config)");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  // phantom
  auto* cmd_phantom = app.add_subcommand("phantom", "Generate paired LR/HR phantoms");
  std::optional<int> ph_n, ph_size;
  std::optional<double> ph_lesion;
  cmd_phantom->add_option("--n", ph_n, "Number of pairs");
  cmd_phantom->add_option("--size", ph_size, "HR size in pixels");
  cmd_phantom->add_option("--lesion-prob", ph_lesion, "Probability of a cartilage lesion");

  // degrade
  auto* cmd_degrade = app.add_subcommand("degrade", "k-space truncation plus Rician noise of one image");
  std::string dg_input;
  std::optional<int> dg_factor;
  std::optional<double> dg_sigma;
  bool dg_keep = false;
  cmd_degrade->add_option("--input", dg_input, "Raw HR image (with JSON sidecar)")->required();
  cmd_degrade->add_option("--factor", dg_factor, "Truncation factor");
  cmd_degrade->add_option("--sigma", dg_sigma, "Rician noise sigma");
  cmd_degrade->add_flag("--keep-grid", dg_keep, "Zero-filled output on the input grid");

  // train
  auto* cmd_train = app.add_subcommand("train", "Train on a paired dataset");
  std::string tr_data;
  std::optional<int> tr_steps, tr_patch, tr_batch;
  std::optional<double> tr_lr;
  bool tr_split = false;
  cmd_train->add_option("--data", tr_data, "Dataset directory (manifest.json)")->required();
  cmd_train->add_option("--steps", tr_steps, "Optimizer steps");
  cmd_train->add_option("--patch", tr_patch, "LR patch size");
  cmd_train->add_option("--batch", tr_batch, "Batch size");
  cmd_train->add_option("--step-size", tr_lr, "Base step size");
  cmd_train->add_flag("--split", tr_split, "Assign train/test with the configured split policy first");

  // infer
  auto* cmd_infer = app.add_subcommand("infer", "Super-resolve one image");
  std::string in_weights, in_input;
  cmd_infer->add_option("--weights", in_weights, "Weight archive")->required();
  cmd_infer->add_option("--input", in_input, "Raw LR image (with JSON sidecar)")->required();

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "PSNR/SSIM of the network and bicubic against HR");
  std::string ev_weights, ev_data;
  cmd_eval->add_option("--weights", ev_weights, "Weight archive")->required();
  cmd_eval->add_option("--data", ev_data, "Dataset directory (manifest.json)")->required();

  // stats
  auto* cmd_stats = app.add_subcommand("stats", "Reader statistics");
  cmd_stats->require_subcommand(1);
  std::string st_ratings, st_table;
  auto* st_agreement = cmd_stats->add_subcommand("agreement", "Inter-reader and intermethod agreement");
  st_agreement->add_option("--ratings", st_ratings, "Ratings table")->required();
  auto* st_compare = cmd_stats->add_subcommand("compare", "Likert comparison across LR/SR/HR");
  st_compare->add_option("--ratings", st_ratings, "Ratings table")->required();
  auto* st_diag = cmd_stats->add_subcommand("diagnostic", "Diagnostic performance against the reference");
  st_diag->add_option("--table", st_table, "Diagnostic table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    auto cfg = resolve(g);

    if (cmd_phantom->parsed()) {
      if (ph_n) cfg.phantom.n = *ph_n;
      if (ph_size) cfg.phantom.size = *ph_size;
      if (ph_lesion) cfg.phantom.lesion_prob = *ph_lesion;
      cfg.validate();
      const auto dir = prepare_out(g, cfg);
      const auto ds = phantom::make_paired_dataset(cfg.phantom.n, cfg.phantom.base_spec(), cfg.degrade, cfg.seed,
                                                   cfg.phantom.lesion_prob);
      train::save_dataset(dir, ds);
      std::printf("wrote %d pairs (%lldx%lld LR, %lldx%lld HR) to %s\n", cfg.phantom.n,
                  static_cast<long long>(ds.pairs[0].lr.height), static_cast<long long>(ds.pairs[0].lr.width),
                  static_cast<long long>(ds.pairs[0].hr.height), static_cast<long long>(ds.pairs[0].hr.width),
                  dir.string().c_str());
    } else if (cmd_degrade->parsed()) {
      if (dg_factor) cfg.degrade.truncation_factor = *dg_factor;
      if (dg_sigma) cfg.degrade.noise_sigma = *dg_sigma;
      if (dg_keep) cfg.degrade.keep_grid = true;
      cfg.validate();
      require_file(dg_input, "input image");
      const auto hr = io::read_raw_image(dg_input);
      const auto dir = prepare_out(g, cfg);
      const auto lr = phantom::degrade(hr, cfg.degrade, cfg.seed);
      io::write_raw_image(dir / "degraded.raw", lr);
      std::printf("wrote %lldx%lld image to %s\n", static_cast<long long>(lr.height),
                  static_cast<long long>(lr.width), (dir / "degraded.raw").string().c_str());
    } else if (cmd_train->parsed()) {
      if (tr_steps) cfg.train.steps = *tr_steps;
      if (tr_patch) cfg.train.patch_size = *tr_patch;
      if (tr_batch) cfg.train.batch_size = *tr_batch;
      if (tr_lr) cfg.train.schedule.base = *tr_lr;
      cfg.validate();
      if (!fs::exists(fs::path(tr_data) / "manifest.json")) throw InputError("no dataset manifest in " + tr_data);
      auto ds = train::load_dataset(tr_data);
      if (tr_split) ds = train::split_dataset(std::move(ds), cfg.split);
      const auto dir = prepare_out(g, cfg);
      const auto result = train::train(ds, cfg.model, cfg.train, [](const train::LossRecord& r) {
        std::fprintf(stderr, "step %6d  mse %.4e  step size %.2e\n", r.step, r.mse, r.step_size);
      });
      nn::save_weights(dir / "weights.bin", result.weights);
      train::write_report(dir / "train_report.tsv", result.report);
      std::printf("train mse %.4e -> %.4e in %.1fs; weights in %s\n", result.report.initial_train_mse,
                  result.report.final_train_mse, result.report.seconds, (dir / "weights.bin").string().c_str());
    } else if (cmd_infer->parsed()) {
      require_file(in_weights, "weights file");
      require_file(in_input, "input image");
      const auto weights = nn::load_weights(in_weights);
      cfg.model = weights.config();
      const auto lr = io::read_raw_image(in_input);
      const auto dir = prepare_out(g, cfg);
      const auto sr = nn::super_resolve(weights, lr);
      if (!sr.all_finite()) throw NumericalError("inference produced non-finite pixels");
      io::write_raw_image(dir / "sr.raw", sr);
      std::printf("wrote %lldx%lld image to %s\n", static_cast<long long>(sr.height),
                  static_cast<long long>(sr.width), (dir / "sr.raw").string().c_str());
    } else if (cmd_eval->parsed()) {
      require_file(ev_weights, "weights file");
      if (!fs::exists(fs::path(ev_data) / "manifest.json")) throw InputError("no dataset manifest in " + ev_data);
      const auto weights = nn::load_weights(ev_weights);
      cfg.model = weights.config();
      const auto ds = train::load_dataset(ev_data);
      auto idx = ds.indices(train::Split::kTest);
      if (idx.empty())
        for (std::size_t i = 0; i < ds.pairs.size(); ++i) idx.push_back(i);
      const auto dir = prepare_out(g, cfg);
      train::TrainReport rep;
      rep.eval = train::evaluate(weights, ds, idx, cfg.train.normalize);
      const auto text = train::to_text(rep);
      write_text(dir / "eval_report.tsv", text);
      std::printf("mean PSNR SR %.2f dB, bicubic %.2f dB; mean SSIM SR %.4f, bicubic %.4f over %zu pairs\n",
                  rep.eval.mean_psnr_sr(), rep.eval.mean_psnr_bicubic(), rep.eval.mean_ssim_sr(),
                  rep.eval.mean_ssim_bicubic(), rep.eval.pairs.size());
    } else if (cmd_stats->parsed()) {
      stats::Report report;
      if (st_diag->parsed()) {
        require_file(st_table, "diagnostic table");
        report = stats::diagnostic_report(stats::read_diagnostic(fs::path(st_table)), cfg.stats.bootstrap_n, cfg.seed);
      } else {
        require_file(st_ratings, "ratings table");
        const auto table = stats::read_ratings(fs::path(st_ratings));
        report = st_compare->parsed() ? stats::compare_report(table, cfg.stats.weighting)
                                      : stats::agreement_report(table, cfg.stats.weighting);
      }
      const auto dir = prepare_out(g, cfg);
      write_text(dir / "report.txt", report.text);
      write_text(dir / "report.tsv", report.tsv);
      std::fputs(report.text.c_str(), stdout);
    }
    return kOk;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumericalError;
  } catch (const stats::SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    for (const auto& row : e.rows()) std::fprintf(stderr, "  %s\n", row.c_str());
    return kInputError;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kInputError;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
}
