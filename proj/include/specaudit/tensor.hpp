#pragma once

#include <cassert>
#include <initializer_list>
#include <string>
#include <vector>

#include "specaudit/error.hpp"
#include "specaudit/types.hpp"

namespace specaudit::nn {

/// Dense row-major tensor over scalar_t. The flat payload is an Eigen
/// array so elementwise math stays expression-based; shaped access goes
/// through the index operators.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<index_t> shape) : shape_(std::move(shape)) {
    index_t total = 1;
    for (index_t e : shape_) {
      if (e <= 0) throw Error(ErrorCode::ShapeMismatch, "non-positive tensor extent");
      total *= e;
    }
    data_ = array_t::Zero(total);
  }

  Tensor(std::initializer_list<index_t> shape)
      : Tensor(std::vector<index_t>(shape)) {}

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const std::vector<index_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  index_t dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  index_t size() const { return data_.size(); }

  scalar_t* data() { return data_.data(); }
  const scalar_t* data() const { return data_.data(); }

  array_t& array() { return data_; }
  const array_t& array() const { return data_; }

  scalar_t operator[](index_t flat) const { return data_[flat]; }
  scalar_t& operator[](index_t flat) { return data_[flat]; }

  scalar_t& operator()(index_t i, index_t j) {
    assert(rank() == 2);
    return data_[i * dim(1) + j];
  }
  scalar_t operator()(index_t i, index_t j) const {
    assert(rank() == 2);
    return data_[i * dim(1) + j];
  }
  scalar_t& operator()(index_t i, index_t j, index_t k) {
    assert(rank() == 3);
    return data_[(i * dim(1) + j) * dim(2) + k];
  }
  scalar_t operator()(index_t i, index_t j, index_t k) const {
    assert(rank() == 3);
    return data_[(i * dim(1) + j) * dim(2) + k];
  }
  scalar_t& operator()(index_t i, index_t j, index_t k, index_t l) {
    assert(rank() == 4);
    return data_[((i * dim(1) + j) * dim(2) + k) * dim(3) + l];
  }
  scalar_t operator()(index_t i, index_t j, index_t k, index_t l) const {
    assert(rank() == 4);
    return data_[((i * dim(1) + j) * dim(2) + k) * dim(3) + l];
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const { return data_.isFinite().all(); }

  std::string shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + ")";
  }

 private:
  std::vector<index_t> shape_;
  array_t data_;
};

}  // namespace specaudit::nn
