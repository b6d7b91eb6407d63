#include "hatsr/io/raw_image.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "../json_support.hpp"
#include "hatsr/error.hpp"

namespace hatsr::io {

std::filesystem::path sidecar_path(const std::filesystem::path& raw_path) {
  auto p = raw_path;
  p.replace_extension(".json");
  return p;
}

void write_raw_image(const std::filesystem::path& raw_path, const Image2D& image) {
  if (static_cast<std::int64_t>(image.size()) != image.height * image.width) {
    throw InputError("write_raw_image: data size does not match extents");
  }
  std::ofstream os(raw_path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open for writing: " + raw_path.string());
  std::vector<unsigned char> buf(image.size() * 4);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(image.data[i]));
    for (int k = 0; k < 4; ++k) buf[4 * i + k] = static_cast<unsigned char>(bits >> (8 * k));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw InputError("failed writing " + raw_path.string());

  detail::json meta{{"height", image.height},     {"width", image.width},       {"pixel_spacing", image.pixel_spacing},
                    {"dtype", "float32"},         {"byte_order", "little"},     {"scan_order", "row-major"}};
  std::ofstream ms(sidecar_path(raw_path), std::ios::trunc);
  if (!ms) throw InputError("cannot open for writing: " + sidecar_path(raw_path).string());
  ms << meta.dump(2) << '\n';
  if (!ms) throw InputError("failed writing " + sidecar_path(raw_path).string());
}

Image2D read_raw_image(const std::filesystem::path& raw_path) {
  const auto meta_path = sidecar_path(raw_path);
  std::ifstream ms(meta_path);
  if (!ms) throw InputError("missing image sidecar: " + meta_path.string());
  Image2D img;
  try {
    const auto meta = detail::json::parse(ms);
    if (meta.value("dtype", std::string("float32")) != "float32" ||
        meta.value("byte_order", std::string("little")) != "little" ||
        meta.value("scan_order", std::string("row-major")) != "row-major") {
      throw InputError("unsupported image encoding in " + meta_path.string());
    }
    img = Image2D(meta.at("height").get<std::int64_t>(), meta.at("width").get<std::int64_t>(),
                  meta.value("pixel_spacing", 1.0));
  } catch (const detail::json::exception& e) {
    throw InputError("bad image sidecar " + meta_path.string() + ": " + e.what());
  }
  std::ifstream is(raw_path, std::ios::binary);
  if (!is) throw InputError("cannot open image: " + raw_path.string());
  std::vector<unsigned char> buf(img.size() * 4);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size() || is.peek() != std::char_traits<char>::eof()) {
    throw InputError("image payload size does not match sidecar extents: " + raw_path.string());
  }
  for (std::size_t i = 0; i < img.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(buf[4 * i + k]) << (8 * k);
    img.data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return img;
}

}  // namespace hatsr::io
