#include "hatsr/phantom/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "hatsr/error.hpp"

namespace hatsr::phantom {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("phantom spec: " + what);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

// Compact smooth ramp: 1 for d <= -e, 0 for d >= e, cubic in between.
double ramp(double d_pixels, double e) {
  if (e <= 0) return d_pixels < 0 ? 1.0 : 0.0;
  const double t = std::clamp((e - d_pixels) / (2 * e), 0.0, 1.0);
  return t * t * (3 - 2 * t);
}

struct EllipseFrame {
  double u, v;
};

EllipseFrame to_frame(double x, double y, const EllipseBand& b) {
  const double c = std::cos(b.angle), s = std::sin(b.angle);
  return {c * (x - b.cx) + s * (y - b.cy), -s * (x - b.cx) + c * (y - b.cy)};
}

double ellipse_radius(const EllipseFrame& f, double rx, double ry) {
  return std::hypot(f.u / rx, f.v / ry);
}

// First-order signed distance to an axis-aligned ellipse in its own frame.
double ellipse_distance(const EllipseFrame& f, double rx, double ry) {
  const double rho = ellipse_radius(f, rx, ry);
  if (rho < 1e-12) return -std::min(rx, ry);
  const double g = std::hypot(f.u / (rx * rx), f.v / (ry * ry)) / rho;
  return (rho - 1.0) / g;
}

double segment_distance(double px, double py, const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double ex = b[0] - a[0], ey = b[1] - a[1];
  const double wx = px - a[0], wy = py - a[1];
  const double len2 = ex * ex + ey * ey;
  const double t = len2 > 0 ? std::clamp((wx * ex + wy * ey) / len2, 0.0, 1.0) : 0.0;
  return std::hypot(wx - t * ex, wy - t * ey);
}

double triangle_distance(double px, double py, const Wedge& w) {
  const auto& v = w.vertices;
  double d = std::numeric_limits<double>::infinity();
  int sign_pos = 0, sign_neg = 0;
  for (int i = 0; i < 3; ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % 3];
    d = std::min(d, segment_distance(px, py, a, b));
    const double cross = (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]);
    (cross >= 0 ? sign_pos : sign_neg)++;
  }
  const bool inside = sign_pos == 3 || sign_neg == 3;
  return inside ? -d : d;
}

double band_mask(double x, double y, const EllipseBand& b, double px_per_unit, double e) {
  const auto f = to_frame(x, y, b);
  const double outer = ramp(ellipse_distance(f, b.rx, b.ry) * px_per_unit, e);
  if (b.thickness <= 0) return outer;
  const double inner = ramp(ellipse_distance(f, b.rx - b.thickness, b.ry - b.thickness) * px_per_unit, e);
  return outer * (1.0 - inner);
}

bool inside_band(double x, double y, const EllipseBand& b) {
  const auto f = to_frame(x, y, b);
  if (ellipse_radius(f, b.rx, b.ry) > 1.0) return false;
  return b.thickness <= 0 || ellipse_radius(f, b.rx - b.thickness, b.ry - b.thickness) >= 1.0;
}

}  // namespace

void PhantomSpec::validate() const {
  check(size >= 8, "size must be >= 8");
  check(pixel_spacing > 0, "pixel_spacing must be positive");
  check(in_unit(background), "background intensity outside [0,1]");
  check(edge_width >= 0, "edge_width must be >= 0");
  check(texture_amplitude >= 0 && texture_amplitude <= 0.5, "texture_amplitude outside [0, 0.5]");
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const std::string tag = "band " + std::to_string(i) + ": ";
    check(in_unit(b.intensity), tag + "intensity outside [0,1]");
    check(std::abs(b.cx) <= 1 && std::abs(b.cy) <= 1, tag + "center outside the field of view");
    check(b.rx > 0 && b.ry > 0 && b.rx <= 2 && b.ry <= 2, tag + "radii must lie in (0, 2]");
    check(b.thickness >= 0 && b.thickness < std::min(b.rx, b.ry), tag + "thickness must lie in [0, min radius)");
  }
  for (std::size_t i = 0; i < wedges.size(); ++i) {
    const auto& w = wedges[i];
    check(in_unit(w.intensity), "wedge " + std::to_string(i) + ": intensity outside [0,1]");
    for (const auto& v : w.vertices) {
      check(std::abs(v[0]) <= 1 && std::abs(v[1]) <= 1, "wedge " + std::to_string(i) + ": vertex out of bounds");
    }
  }
  if (lesion) {
    check(lesion->radius > 0 && lesion->radius < 0.5, "lesion radius must lie in (0, 0.5)");
    check(std::abs(lesion->intensity_delta) <= 1, "lesion intensity delta outside [-1,1]");
    check(std::abs(lesion->cx) <= 1 && std::abs(lesion->cy) <= 1, "lesion center outside the field of view");
    const bool in_cartilage = std::any_of(bands.begin(), bands.end(), [&](const EllipseBand& b) {
      return b.tissue == Tissue::kCartilage && inside_band(lesion->cx, lesion->cy, b);
    });
    check(in_cartilage, "lesion must lie inside a cartilage band");
  }
}

PhantomSpec default_knee_spec(int size) {
  PhantomSpec s;
  s.size = size;
  s.pixel_spacing = 0.4 * 384.0 / size;
  s.bands = {
      {0.0, 0.0, 0.86, 0.96, 0.0, 0.0, 0.28, Tissue::kSoftTissue},
      {0.0, 0.0, 0.56, 0.14, 0.0, 0.0, 0.85, Tissue::kFluid},
      {0.0, -0.46, 0.50, 0.46, 0.0, 0.05, 0.62, Tissue::kCartilage},
      {0.0, -0.46, 0.45, 0.41, 0.0, 0.0, 0.32, Tissue::kBone},
      {0.0, 0.50, 0.52, 0.43, 0.0, 0.045, 0.58, Tissue::kCartilage},
      {0.0, 0.50, 0.475, 0.385, 0.0, 0.0, 0.36, Tissue::kBone},
      {0.04, 0.02, 0.035, 0.16, 0.45, 0.0, 0.12, Tissue::kLigament},
  };
  s.wedges = {
      Wedge{{{{-0.62, -0.05}, {-0.62, 0.07}, {-0.34, 0.02}}}, 0.06},
      Wedge{{{{0.62, -0.05}, {0.62, 0.07}, {0.34, 0.02}}}, 0.06},
  };
  return s;
}

PhantomSpec perturb_spec(const PhantomSpec& base, std::uint64_t seed, double lesion_prob) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PhantomSpec s = base;
  s.seed = rng();
  for (auto& b : s.bands) {
    b.cx = std::clamp(b.cx + 0.03 * u(rng), -1.0, 1.0);
    b.cy = std::clamp(b.cy + 0.03 * u(rng), -1.0, 1.0);
    const double scale = 1.0 + 0.06 * u(rng);
    b.rx = std::min(2.0, b.rx * scale * (1.0 + 0.03 * u(rng)));
    b.ry = std::min(2.0, b.ry * scale * (1.0 + 0.03 * u(rng)));
    b.angle += 0.1 * u(rng);
    if (b.thickness > 0) b.thickness = std::min(b.thickness * (1.0 + 0.2 * u(rng)), 0.5 * std::min(b.rx, b.ry));
    b.intensity = std::clamp(b.intensity + 0.05 * u(rng), 0.0, 1.0);
  }
  for (auto& w : s.wedges) {
    for (auto& v : w.vertices) {
      v[0] = std::clamp(v[0] + 0.02 * u(rng), -1.0, 1.0);
      v[1] = std::clamp(v[1] + 0.02 * u(rng), -1.0, 1.0);
    }
    w.intensity = std::clamp(w.intensity + 0.03 * u(rng), 0.0, 1.0);
  }
  s.lesion.reset();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto cart = std::find_if(s.bands.begin(), s.bands.end(),
                                 [](const EllipseBand& b) { return b.tissue == Tissue::kCartilage; });
  if (cart != s.bands.end() && unit(rng) < lesion_prob) {
    const double theta = std::numbers::pi * (0.25 + 0.5 * unit(rng));
    const double fu = (cart->rx - cart->thickness / 2) * std::cos(theta);
    const double fv = (cart->ry - cart->thickness / 2) * std::sin(theta);
    const double c = std::cos(cart->angle), sn = std::sin(cart->angle);
    Lesion l;
    l.cx = cart->cx + c * fu - sn * fv;
    l.cy = cart->cy + sn * fu + c * fv;
    l.radius = cart->thickness * (0.4 + 0.4 * unit(rng));
    l.intensity_delta = 0.2 + 0.15 * unit(rng);
    static constexpr stats::NoyesGrade kGrades[] = {stats::NoyesGrade::k1, stats::NoyesGrade::k2A,
                                                    stats::NoyesGrade::k2B, stats::NoyesGrade::k3};
    l.grade = kGrades[rng() % 4];
    s.lesion = l;
  }
  return s;
}

Image2D generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const int n = spec.size;
  const double px_per_unit = n / 2.0;
  const double e = spec.edge_width;
  Image2D img(n, n, spec.pixel_spacing, spec.background);

  // Seeded texture: a few low-frequency plane waves.
  constexpr int kWaves = 6;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<std::array<double, 3>, kWaves> waves{};
  for (auto& w : waves) {
    const double freq = 1.0 + 3.0 * u(rng), dir = 2 * std::numbers::pi * u(rng);
    w = {freq * std::cos(dir), freq * std::sin(dir), 2 * std::numbers::pi * u(rng)};
  }
  const double wave_amp = spec.texture_amplitude / std::sqrt(static_cast<double>(kWaves));

  for (int py = 0; py < n; ++py) {
    const double y = (py + 0.5) / px_per_unit - 1.0;
    for (int px = 0; px < n; ++px) {
      const double x = (px + 0.5) / px_per_unit - 1.0;
      double v = spec.background;
      for (const auto& b : spec.bands) {
        const double m = band_mask(x, y, b, px_per_unit, e);
        v = v * (1 - m) + b.intensity * m;
      }
      for (const auto& w : spec.wedges) {
        const double m = ramp(triangle_distance(x, y, w) * px_per_unit, e);
        v = v * (1 - m) + w.intensity * m;
      }
      double tex = 0;
      for (const auto& w : waves) tex += std::cos(std::numbers::pi * (w[0] * x + w[1] * y) + w[2]);
      v += wave_amp * tex;
      if (spec.lesion) {
        const auto& l = *spec.lesion;
        v += l.intensity_delta * ramp((std::hypot(x - l.cx, y - l.cy) - l.radius) * px_per_unit, e);
      }
      img(py, px) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace hatsr::phantom
