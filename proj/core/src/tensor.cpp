#include "hatsr/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "hatsr/error.hpp"

namespace hatsr {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw InputError("negative tensor extent in " + shape_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, const std::vector<T>& data)
    : Tensor(std::move(shape), AlignedVector<T>(data.begin(), data.end())) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, AlignedVector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<std::int64_t>(data_.size()) != shape_numel(shape_)) {
    throw InputError("tensor data size " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const& {
  return Tensor(std::move(shape), data_);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) && {
  return Tensor(std::move(shape), std::move(data_));
}

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, int scale) {
  if (input.rank() != 4 || scale < 1) throw InputError("pixel_shuffle expects [B,H,W,C] and scale >= 1");
  const auto B = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
  const std::int64_t s2 = static_cast<std::int64_t>(scale) * scale;
  if (C % s2 != 0) {
    throw ConfigError("pixel_shuffle: " + std::to_string(C) + " channels not divisible by " + std::to_string(s2));
  }
  const auto Co = C / s2;
  Tensor<T> out({B, H * scale, W * scale, Co});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t y = 0; y < H; ++y)
      for (std::int64_t x = 0; x < W; ++x)
        for (std::int64_t c = 0; c < Co; ++c)
          for (int i = 0; i < scale; ++i)
            for (int j = 0; j < scale; ++j)
              out.at(b, y * scale + i, x * scale + j, c) = input.at(b, y, x, c * s2 + i * scale + j);
  return out;
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& input, int scale) {
  if (input.rank() != 4 || scale < 1) throw InputError("pixel_unshuffle expects [B,H,W,C] and scale >= 1");
  const auto B = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
  if (H % scale != 0 || W % scale != 0) throw InputError("pixel_unshuffle: extents not divisible by scale");
  const std::int64_t s2 = static_cast<std::int64_t>(scale) * scale;
  Tensor<T> out({B, H / scale, W / scale, C * s2});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t y = 0; y < H / scale; ++y)
      for (std::int64_t x = 0; x < W / scale; ++x)
        for (std::int64_t c = 0; c < C; ++c)
          for (int i = 0; i < scale; ++i)
            for (int j = 0; j < scale; ++j)
              out.at(b, y, x, c * s2 + i * scale + j) = input.at(b, y * scale + i, x * scale + j, c);
  return out;
}

template class Tensor<float>;
template class Tensor<double>;
template Tensor<float> pixel_shuffle(const Tensor<float>&, int);
template Tensor<double> pixel_shuffle(const Tensor<double>&, int);
template Tensor<float> pixel_unshuffle(const Tensor<float>&, int);
template Tensor<double> pixel_unshuffle(const Tensor<double>&, int);

}  // namespace hatsr
