#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace seagrass::numerics {

/// Extents of a rank-4 tensor in (batch, channels, height, width) order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t count() const { return n * c * h * w; }
  constexpr std::size_t plane() const { return h * w; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense row-major NCHW array, width fastest. T is float for production
/// paths and double for gradient checking.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{});
  Tensor(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  std::size_t index(std::size_t b, std::size_t ch, std::size_t y, std::size_t x) const {
    return ((b * shape_.c + ch) * shape_.h + y) * shape_.w + x;
  }
  T& operator()(std::size_t b, std::size_t ch, std::size_t y, std::size_t x) {
    return data_[index(b, ch, y, x)];
  }
  T operator()(std::size_t b, std::size_t ch, std::size_t y, std::size_t x) const {
    return data_[index(b, ch, y, x)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  /// Pointer to the (b, ch) plane.
  T* plane(std::size_t b, std::size_t ch) { return data_.data() + index(b, ch, 0, 0); }
  const T* plane(std::size_t b, std::size_t ch) const { return data_.data() + index(b, ch, 0, 0); }

  void fill(T value);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(T scale);

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool all_finite() const;

 private:
  Shape shape_{};
  std::vector<T> data_;
};

template <typename T>
T dot(const Tensor<T>& a, const Tensor<T>& b);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace seagrass::numerics
