#include "hatsr/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hatsr/error.hpp"
#include "hatsr/nn/network.hpp"
#include "hatsr/ops.hpp"
#include "hatsr/train/metrics.hpp"

namespace hatsr::train {

double StepSchedule::at(int step, int total_steps) const {
  double lr = base;
  for (double p : decay_points)
    if (step >= static_cast<int>(std::lround(p * total_steps))) lr *= factor;
  return lr;
}

void TrainConfig::validate(const nn::ModelConfig& model) const {
  if (steps <= 0) throw ConfigError("train: steps must be > 0");
  if (batch_size <= 0) throw ConfigError("train: batch_size must be > 0");
  if (log_every <= 0) throw ConfigError("train: log_every must be > 0");
  if (patch_size < model.window_size) throw ConfigError("train: patch_size must be >= window_size");
  if (!(schedule.base > 0) || !(schedule.factor > 0)) throw ConfigError("train: step sizes must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && adam_eps > 0)) {
    throw ConfigError("train: invalid Adam moments");
  }
}

namespace {

double mean_of(const std::vector<PairEval>& v, double PairEval::*field) {
  if (v.empty()) return std::nan("");
  double s = 0;
  for (const auto& p : v) s += p.*field;
  return s / static_cast<double>(v.size());
}

// Copies an s*p window starting at (y0, x0) into batch slot b, applying the
// augmentation code: bit 0 flips x, bit 1 flips y, bit 2 transposes.
void copy_patch(const Image2D& img, std::int64_t y0, std::int64_t x0, std::int64_t size, int aug, Tensor<float>& out,
                std::int64_t b) {
  float* dst = out.data() + b * size * size;
  for (std::int64_t y = 0; y < size; ++y) {
    for (std::int64_t x = 0; x < size; ++x) {
      std::int64_t sy = y, sx = x;
      if (aug & 4) std::swap(sy, sx);
      if (aug & 1) sx = size - 1 - sx;
      if (aug & 2) sy = size - 1 - sy;
      dst[y * size + x] = static_cast<float>(img(y0 + sy, x0 + sx));
    }
  }
}

double full_image_mse(const nn::ModelWeights<float>& w, const std::vector<ImagePair>& pairs) {
  double s = 0;
  for (const auto& p : pairs) s += mse_loss(nn::super_resolve(w, p.lr), p.hr);
  return s / static_cast<double>(pairs.size());
}

}  // namespace

double EvalReport::mean_psnr_sr() const { return mean_of(pairs, &PairEval::psnr_sr); }
double EvalReport::mean_psnr_bicubic() const { return mean_of(pairs, &PairEval::psnr_bicubic); }
double EvalReport::mean_ssim_sr() const { return mean_of(pairs, &PairEval::ssim_sr); }
double EvalReport::mean_ssim_bicubic() const { return mean_of(pairs, &PairEval::ssim_bicubic); }
double EvalReport::mean_mse_sr() const { return mean_of(pairs, &PairEval::mse_sr); }

ImagePair prepare_pair(const ImagePair& pair, bool normalize) {
  if (!normalize) return pair;
  ImagePair out = pair;
  out.lr = normalize_percentile(pair.lr);
  out.hr = normalize_percentile(pair.hr);
  return out;
}

TrainResult train(const PairedDataset& dataset, const nn::ModelConfig& model, const TrainConfig& cfg,
                  const ProgressFn& progress) {
  return train(dataset, nn::initialize_weights<float>(model, cfg.seed), cfg, progress);
}

TrainResult train(const PairedDataset& dataset, nn::ModelWeights<float> weights, const TrainConfig& cfg,
                  const ProgressFn& progress) {
  const auto& model = weights.config();
  model.validate();
  cfg.validate(model);
  dataset.validate();
  if (dataset.scale != model.upscale) {
    throw ConfigError("train: dataset scale " + std::to_string(dataset.scale) + " does not match model upscale " +
                      std::to_string(model.upscale));
  }
  auto idx = dataset.indices(Split::kTrain);
  if (idx.empty() && dataset.indices(Split::kTest).empty()) {
    idx.resize(dataset.pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  if (idx.empty()) throw InputError("train: empty train split");

  std::vector<ImagePair> pairs;
  for (std::size_t i : idx) {
    pairs.push_back(prepare_pair(dataset.pairs[i], cfg.normalize));
    const auto& lr = pairs.back().lr;
    if (lr.height < cfg.patch_size || lr.width < cfg.patch_size) {
      throw ConfigError("train: patch_size " + std::to_string(cfg.patch_size) + " exceeds LR image " +
                        std::to_string(lr.height) + "x" + std::to_string(lr.width));
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  auto& report = result.report;
  report.initial_train_mse = full_image_mse(weights, pairs);

  const int s = model.upscale;
  const std::int64_t p = cfg.patch_size, hp = p * s, B = cfg.batch_size;
  std::mt19937_64 rng(cfg.seed);

  std::vector<Tensor<float>> m1, m2;
  for (const auto& e : weights) {
    m1.emplace_back(e.tensor.shape());
    m2.emplace_back(e.tensor.shape());
  }

  double running = 0;
  int running_n = 0;
  for (int step = 0; step < cfg.steps; ++step) {
    Tensor<float> lr_batch({B, p, p, 1}), hr_batch({B, hp, hp, 1});
    for (std::int64_t b = 0; b < B; ++b) {
      const auto& pair = pairs[std::uniform_int_distribution<std::size_t>(0, pairs.size() - 1)(rng)];
      const auto y0 = std::uniform_int_distribution<std::int64_t>(0, pair.lr.height - p)(rng);
      const auto x0 = std::uniform_int_distribution<std::int64_t>(0, pair.lr.width - p)(rng);
      const int aug = cfg.augment ? static_cast<int>(rng() % 8) : 0;
      copy_patch(pair.lr, y0, x0, p, aug, lr_batch, b);
      copy_patch(pair.hr, y0 * s, x0 * s, hp, aug, hr_batch, b);
    }

    ag::Graph<float> graph(true);
    nn::Scope<float> scope(graph, weights, true);
    const auto pred = nn::forward(scope, graph.constant(std::move(lr_batch)));
    const auto loss = ag::mse(pred, graph.constant(std::move(hr_batch)));
    const double mse = loss.value()[0];
    if (!std::isfinite(mse)) {
      throw NumericalError("train: non-finite loss at step " + std::to_string(step + 1));
    }
    graph.backward(loss);
    const auto grads = scope.gradients();

    const double lr = cfg.schedule.at(step, cfg.steps);
    const double bc1 = 1 - std::pow(cfg.beta1, step + 1), bc2 = 1 - std::pow(cfg.beta2, step + 1);
    const auto b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
    const auto a = static_cast<float>(lr / bc1), isb2 = static_cast<float>(1.0 / std::sqrt(bc2));
    const auto eps = static_cast<float>(cfg.adam_eps);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      float* w = weights[i].tensor.data();
      const float* g = grads[i].tensor.data();
      float* mm = m1[i].data();
      float* vv = m2[i].data();
      for (std::size_t j = 0; j < weights[i].tensor.size(); ++j) {
        mm[j] = b1 * mm[j] + (1 - b1) * g[j];
        vv[j] = b2 * vv[j] + (1 - b2) * g[j] * g[j];
        w[j] -= a * mm[j] / (std::sqrt(vv[j]) * isb2 + eps);
      }
    }

    running += mse;
    ++running_n;
    if ((step + 1) % cfg.log_every == 0 || step + 1 == cfg.steps) {
      LossRecord rec{step + 1, running / running_n, lr};
      report.loss.push_back(rec);
      if (progress) progress(rec);
      running = 0;
      running_n = 0;
    }
  }
  if (!weights.all_finite()) throw NumericalError("train: weights became non-finite");
  report.final_train_mse = full_image_mse(weights, pairs);
  if (!std::isfinite(report.final_train_mse)) throw NumericalError("train: non-finite final loss");

  const auto test = dataset.indices(Split::kTest);
  if (!test.empty()) report.eval = evaluate(weights, dataset, test, cfg.normalize);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.weights = std::move(weights);
  return result;
}

EvalReport evaluate(const nn::ModelWeights<float>& weights, const PairedDataset& dataset,
                    const std::vector<std::size_t>& indices, bool normalize) {
  EvalReport rep;
  for (std::size_t i : indices) {
    if (i >= dataset.pairs.size()) throw InputError("evaluate: pair index out of range");
    const auto pair = prepare_pair(dataset.pairs[i], normalize);
    const auto sr = nn::super_resolve(weights, pair.lr);
    const auto bic = bicubic_upscale(pair.lr, weights.config().upscale);
    PairEval e;
    e.subject_id = pair.subject_id;
    e.mse_sr = mse_loss(sr, pair.hr);
    e.mse_bicubic = mse_loss(bic, pair.hr);
    e.psnr_sr = psnr(sr, pair.hr);
    e.psnr_bicubic = psnr(bic, pair.hr);
    e.ssim_sr = ssim(sr, pair.hr);
    e.ssim_bicubic = ssim(bic, pair.hr);
    rep.pairs.push_back(e);
  }
  return rep;
}

std::string to_text(const TrainReport& r) {
  std::ostringstream o;
  o.precision(10);
  o << "# loss\nstep\tmse\tstep_size\n";
  for (const auto& l : r.loss) o << l.step << '\t' << l.mse << '\t' << l.step_size << '\n';
  o << "# summary\ninitial_train_mse\t" << r.initial_train_mse << "\nfinal_train_mse\t" << r.final_train_mse
    << '\n';
  o << "# eval\nsubject\tpsnr_sr\tpsnr_bicubic\tssim_sr\tssim_bicubic\n";
  for (const auto& e : r.eval.pairs) {
    o << e.subject_id << '\t' << e.psnr_sr << '\t' << e.psnr_bicubic << '\t' << e.ssim_sr << '\t' << e.ssim_bicubic
      << '\n';
  }
  if (!r.eval.pairs.empty()) {
    o << "mean\t" << r.eval.mean_psnr_sr() << '\t' << r.eval.mean_psnr_bicubic() << '\t' << r.eval.mean_ssim_sr()
      << '\t' << r.eval.mean_ssim_bicubic() << '\n';
  }
  return o.str();
}

void write_report(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << to_text(report);
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace hatsr::train
