#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chal {

// Dense row-major tensor of 64-bit floats. The shape is fixed at
// construction and the data length always equals the product of the shape.
// Operations on tensors return new values; nothing mutates a tensor that
// another thread might be reading.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);

  // Tensor with explicit contents; values.size() must equal the shape product.
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  // Same data, different shape; the element count must be unchanged.
  Tensor reshaped(std::vector<std::size_t> new_shape) const;

  bool same_shape(const Tensor& other) const noexcept {
    return shape_ == other.shape_;
  }

  // Treating axis 0 as the batch axis: number of rows and flat row length.
  std::size_t batch() const;
  std::size_t row_size() const;
  std::span<const double> row(std::size_t b) const;
  std::span<double> row(std::size_t b);

  // Copies row b out as a tensor shaped like one sample (shape minus axis 0).
  Tensor row_tensor(std::size_t b) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

enum class TopMode { highest, lowest };

// Standard matrix product of a [m x k] by b [k x n].
Tensor matmul(const Tensor& a, const Tensor& b);

// Transpose of a [m x n] matrix.
Tensor transpose(const Tensor& a);

// Indices of the n largest (highest) or smallest (lowest) values of a flat
// tensor, in rank order. Ties break toward the lower index.
std::vector<std::size_t> topn_indices(const Tensor& v, std::size_t n,
                                      TopMode mode);

std::string shape_string(std::span<const std::size_t> shape);

}  // namespace chal
