#pragma once

#include <filesystem>

#include "hatsr/image.hpp"

namespace hatsr::io {

/// Sidecar metadata path for a raw image: same stem, ".json" extension.
std::filesystem::path sidecar_path(const std::filesystem::path& raw_path);

/// Writes float32 little-endian row-major pixels to `raw_path` and a JSON
/// sidecar {height, width, pixel_spacing, dtype, byte_order, scan_order}.
void write_raw_image(const std::filesystem::path& raw_path, const Image2D& image);

/// Reads an image written by write_raw_image. Throws InputError on a missing
/// or inconsistent sidecar, or a payload of the wrong length.
Image2D read_raw_image(const std::filesystem::path& raw_path);

}  // namespace hatsr::io
