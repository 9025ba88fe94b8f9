#pragma once
// Dense tensor of 64-bit floats, rank 0..3, contiguous row-major storage.
// No broadcasting anywhere: every operation states its exact shape
// contract and rejects anything else.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "hinctr/errors.hpp"
#include "hinctr/rng.hpp"

namespace hinctr {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    size_t n = 1;
    for (int d : shape_) {
      if (d < 0) throw NumericError("negative tensor dimension");
      n *= static_cast<size_t>(d);
    }
    if (shape_.size() > 3) throw NumericError("tensor rank > 3");
    data_.assign(n, 0.0);
  }
  Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

  static Tensor scalar(double v) {
    Tensor t({1});
    t.data_[0] = v;
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(i); }
  const std::vector<int>& shape() const { return shape_; }
  size_t size() const { return data_.size(); }

  int rows() const { return shape_.at(0); }
  int cols() const { return shape_.at(1); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void fill_uniform(Rng& rng, double lo, double hi) {
    for (auto& x : data_) x = rng.uniform(lo, hi);
  }
  bool all_finite() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

// A trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name_, Tensor value_)
      : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace hinctr
