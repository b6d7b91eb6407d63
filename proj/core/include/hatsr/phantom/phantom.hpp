#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hatsr/image.hpp"
#include "hatsr/stats/types.hpp"

namespace hatsr::phantom {

// Geometry is in normalized coordinates: x and y span [-1, 1] across the
// image, y pointing down.

enum class Tissue { kSoftTissue, kBone, kCartilage, kFluid, kLigament };

/// Filled ellipse, or an elliptical shell of the given thickness when
/// thickness > 0 (the outer boundary is the ellipse itself).
struct EllipseBand {
  double cx = 0, cy = 0;
  double rx = 0.5, ry = 0.5;
  double angle = 0;  // radians
  double thickness = 0;
  double intensity = 0.5;
  Tissue tissue = Tissue::kSoftTissue;
};

/// Triangular structure (meniscus analogue).
struct Wedge {
  std::array<std::array<double, 2>, 3> vertices{};
  double intensity = 0.05;
};

struct Lesion {
  double cx = 0, cy = 0;
  double radius = 0.03;
  double intensity_delta = 0.3;
  stats::NoyesGrade grade = stats::NoyesGrade::k2A;
};

struct PhantomSpec {
  int size = 384;
  std::uint64_t seed = 0;
  double pixel_spacing = 0.4;  // mm
  double background = 0.05;
  double edge_width = 1.0;          // half-width of the smooth edge ramp, pixels
  double texture_amplitude = 0.02;  // seeded low-frequency modulation
  std::vector<EllipseBand> bands;   // painted in order
  std::vector<Wedge> wedges;        // painted after bands
  std::optional<Lesion> lesion;     // added last

  /// Throws ConfigError for intensities outside [0,1], out-of-bounds
  /// geometry, or a lesion that is not inside a cartilage band.
  void validate() const;
};

/// Knee-like default: soft tissue, joint fluid, femoral and tibial marrow with
/// cartilage shells, two menisci and a cruciate ligament.
PhantomSpec default_knee_spec(int size = 384);

/// Randomized variant of `base` (jittered geometry and intensities, new
/// texture seed, lesion in femoral cartilage with probability lesion_prob).
PhantomSpec perturb_spec(const PhantomSpec& base, std::uint64_t seed, double lesion_prob = 0.5);

/// Smooth-edged composite, clamped to [0,1]. Pure function of the spec.
Image2D generate_phantom(const PhantomSpec& spec);

}  // namespace hatsr::phantom
