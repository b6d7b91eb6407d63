#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace hatsr {

using Shape = std::vector<std::int64_t>;

/// 64-byte aligned storage. Vectorized reductions choose their packet split
/// from the buffer address, so a fixed alignment keeps results reproducible
/// from run to run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor with value semantics. Feature maps use the
/// [batch, height, width, channels] layout throughout.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, const std::vector<T>& data);
  Tensor(Shape shape, AlignedVector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::int64_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Element of a rank-4 [B,H,W,C] tensor.
  T& at(std::int64_t b, std::int64_t y, std::int64_t x, std::int64_t c) {
    return data_[static_cast<std::size_t>(((b * shape_[1] + y) * shape_[2] + x) * shape_[3] + c)];
  }
  const T& at(std::int64_t b, std::int64_t y, std::int64_t x, std::int64_t c) const {
    return data_[static_cast<std::size_t>(((b * shape_[1] + y) * shape_[2] + x) * shape_[3] + c)];
  }

  void fill(T v);
  /// Same data viewed under a new shape with the same element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, AlignedVector<U>(data_.begin(), data_.end()));
  }

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  AlignedVector<T> data_;
};

/// Channel-to-space rearrangement: [B,H,W,C*s*s] -> [B,H*s,W*s,C] with
/// out(y*s+i, x*s+j, c) = in(y, x, c*s*s + i*s + j).
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& input, int scale);

/// Inverse of pixel_shuffle.
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& input, int scale);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace hatsr
