#include "seagrass/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "seagrass/error.hpp"

namespace seagrass::numerics {

std::string to_string(const Shape& s) {
  return std::to_string(s.n) + "x" + std::to_string(s.c) + "x" + std::to_string(s.h) + "x" +
         std::to_string(s.w);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(shape), data_(shape.count(), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)) {
  require(data_.size() == shape_.count(), "tensor data length " + std::to_string(data_.size()) +
                                              " does not match shape " + to_string(shape_));
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T>& Tensor<T>::operator+=(const Tensor& other) {
  require(shape_ == other.shape_,
          "tensor add: shape " + to_string(shape_) + " vs " + to_string(other.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

template <typename T>
Tensor<T>& Tensor<T>::operator*=(T scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
T dot(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "dot: shape mismatch");
  T acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template class Tensor<float>;
template class Tensor<double>;
template float dot(const Tensor<float>&, const Tensor<float>&);
template double dot(const Tensor<double>&, const Tensor<double>&);

}  // namespace seagrass::numerics
