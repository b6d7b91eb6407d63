#include "hatsr/phantom/degrade.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <random>
#include <string>

#include "hatsr/error.hpp"

namespace hatsr::phantom {

namespace {

using cd = std::complex<double>;

// Applies a 1D transform along every row, then along every column.
template <typename F>
void transform_2d(std::vector<cd>& data, std::int64_t h, std::int64_t w, F&& f1d) {
  std::vector<cd> in, out;
  in.resize(static_cast<std::size_t>(w));
  for (std::int64_t y = 0; y < h; ++y) {
    std::copy_n(data.begin() + y * w, w, in.begin());
    f1d(out, in);
    std::copy_n(out.begin(), w, data.begin() + y * w);
  }
  in.resize(static_cast<std::size_t>(h));
  for (std::int64_t x = 0; x < w; ++x) {
    for (std::int64_t y = 0; y < h; ++y) in[y] = data[y * w + x];
    f1d(out, in);
    for (std::int64_t y = 0; y < h; ++y) data[y * w + x] = out[y];
  }
}

Eigen::FFT<double> make_fft() {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  return fft;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void DegradationConfig::validate() const {
  if (truncation_factor < 1) throw ConfigError("degradation: truncation_factor must be >= 1");
  if (!(noise_sigma >= 0)) throw ConfigError("degradation: noise_sigma must be >= 0");
}

ComplexImage fft2(const ComplexImage& img) {
  ComplexImage out = img;
  auto fft = make_fft();
  transform_2d(out.data, out.height, out.width, [&](std::vector<cd>& o, const std::vector<cd>& i) { fft.fwd(o, i); });
  return out;
}

ComplexImage kspace_truncate_complex(const Image2D& hr, const DegradationConfig& cfg) {
  cfg.validate();
  const int f = cfg.truncation_factor;
  const std::int64_t h = hr.height, w = hr.width;
  if (h < 1 || w < 1 || h % f != 0 || w % f != 0) {
    throw InputError("kspace_truncate: factor " + std::to_string(f) + " does not divide " + std::to_string(h) + "x" +
                     std::to_string(w));
  }
  if (!hr.all_finite()) throw InputError("kspace_truncate: non-finite input");

  ComplexImage spectrum{h, w, std::vector<cd>(hr.data.begin(), hr.data.end())};
  spectrum = fft2(spectrum);

  const std::int64_t my = h / f, mx = w / f;
  const std::int64_t oh = cfg.keep_grid ? h : my, ow = cfg.keep_grid ? w : mx;
  ComplexImage out{oh, ow, std::vector<cd>(static_cast<std::size_t>(oh * ow))};
  const auto wrap = [](std::int64_t k, std::int64_t n) { return ((k % n) + n) % n; };
  for (std::int64_t ky = -(my / 2); ky < my - my / 2; ++ky) {
    for (std::int64_t kx = -(mx / 2); kx < mx - mx / 2; ++kx) {
      out.data[wrap(ky, oh) * ow + wrap(kx, ow)] = spectrum.data[wrap(ky, h) * w + wrap(kx, w)];
    }
  }

  auto fft = make_fft();
  transform_2d(out.data, oh, ow, [&](std::vector<cd>& o, const std::vector<cd>& i) { fft.inv(o, i); });
  const double scale = 1.0 / static_cast<double>(h * w);
  for (auto& v : out.data) v *= scale;
  return out;
}

Image2D kspace_truncate(const Image2D& hr, const DegradationConfig& cfg) {
  const auto c = kspace_truncate_complex(hr, cfg);
  const double spacing = cfg.keep_grid ? hr.pixel_spacing : hr.pixel_spacing * cfg.truncation_factor;
  Image2D out(c.height, c.width, spacing);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::abs(c.data[i]);
  return out;
}

Image2D add_rician_noise(const Image2D& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0)) throw ConfigError("rician noise: sigma must be >= 0");
  Image2D out = img;
  if (sigma == 0) {
    for (auto& v : out.data) v = std::abs(v);
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& v : out.data) {
    const double re = v + n(rng);
    const double im = n(rng);
    v = std::hypot(re, im);
  }
  return out;
}

Image2D degrade(const Image2D& hr, const DegradationConfig& cfg, std::uint64_t seed) {
  return add_rician_noise(kspace_truncate(hr, cfg), cfg.noise_sigma, seed);
}

train::PairedDataset make_paired_dataset(int n, const PhantomSpec& base_spec, const DegradationConfig& cfg,
                                         std::uint64_t seed, double lesion_prob) {
  if (n < 1) throw ConfigError("make_paired_dataset: n must be >= 1");
  cfg.validate();
  train::PairedDataset ds;
  ds.scale = cfg.keep_grid ? 1 : cfg.truncation_factor;
  ds.pairs.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t s = splitmix(seed ^ splitmix(static_cast<std::uint64_t>(i)));
    auto& p = ds.pairs[static_cast<std::size_t>(i)];
    p.hr = generate_phantom(perturb_spec(base_spec, s, lesion_prob));
    p.lr = degrade(p.hr, cfg, splitmix(s));
    p.subject_id = "phantom-" + std::to_string(i);
    p.knee_side = i % 2 == 0 ? "R" : "L";
  }
  return ds;
}

}  // namespace hatsr::phantom
