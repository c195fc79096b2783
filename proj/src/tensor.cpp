#include "chal/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace chal {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw std::invalid_argument("tensor: zero dimension in shape " +
                                  shape_string(shape_));
    }
  }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw std::invalid_argument("tensor: zero dimension in shape " +
                                  shape_string(shape_));
    }
  }
  if (data_.size() != shape_product(shape_)) {
    throw std::invalid_argument(
        "tensor: " + std::to_string(data_.size()) +
        " values do not fill shape " + shape_string(shape_));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::out_of_range("tensor: axis " + std::to_string(axis) +
                            " out of range for rank " +
                            std::to_string(shape_.size()));
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (shape_product(new_shape) != data_.size()) {
    throw std::invalid_argument("tensor: cannot reshape " +
                                shape_string(shape_) + " to " +
                                shape_string(new_shape));
  }
  return Tensor(std::move(new_shape), data_);
}

std::size_t Tensor::batch() const {
  if (shape_.empty()) {
    throw std::invalid_argument("tensor: rank-0 tensor has no batch axis");
  }
  return shape_[0];
}

std::size_t Tensor::row_size() const { return data_.size() / batch(); }

std::span<const double> Tensor::row(std::size_t b) const {
  const std::size_t n = row_size();
  if (b >= batch()) {
    throw std::out_of_range("tensor: row " + std::to_string(b) +
                            " out of range for batch " +
                            std::to_string(batch()));
  }
  return std::span<const double>(data_).subspan(b * n, n);
}

std::span<double> Tensor::row(std::size_t b) {
  const std::size_t n = row_size();
  if (b >= batch()) {
    throw std::out_of_range("tensor: row " + std::to_string(b) +
                            " out of range for batch " +
                            std::to_string(batch()));
  }
  return std::span<double>(data_).subspan(b * n, n);
}

Tensor Tensor::row_tensor(std::size_t b) const {
  auto r = row(b);
  std::vector<std::size_t> sample_shape(shape_.begin() + 1, shape_.end());
  if (sample_shape.empty()) {
    sample_shape.push_back(1);
  }
  return Tensor(std::move(sample_shape), std::vector<double>(r.begin(), r.end()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " +
                                shape_string(a.shape()) + " and " +
                                shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t n = b.dim(1);
  Tensor out({m, n});
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = pa[i * k + kk];
      if (aik == 0.0) continue;
      const double* brow = pb + kk * n;
      double* orow = po + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw std::invalid_argument("transpose: expected rank-2, got " +
                                shape_string(a.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t n = a.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j * m + i] = a[i * n + j];
    }
  }
  return out;
}

std::vector<std::size_t> topn_indices(const Tensor& v, std::size_t n,
                                      TopMode mode) {
  if (n > v.size()) {
    throw std::invalid_argument("topn_indices: n=" + std::to_string(n) +
                                " exceeds length " + std::to_string(v.size()));
  }
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto better = [&](std::size_t i, std::size_t j) {
    if (v[i] != v[j]) {
      return mode == TopMode::highest ? v[i] > v[j] : v[i] < v[j];
    }
    return i < j;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n),
                    idx.end(), better);
  idx.resize(n);
  return idx;
}

std::string shape_string(std::span<const std::size_t> shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << " x ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

}  // namespace chal
