#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <vector>

#include "alise/check.hpp"

namespace alise {

/// Row-major dense double tensor. Copies share the buffer; ops never mutate
/// an existing buffer, they allocate fresh outputs. Use clone() for a private
/// writable copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape)
      : shape_(std::move(shape)),
        buf_(std::make_shared<std::vector<double>>(count(shape_), 0.0)) {}
  Tensor(std::vector<int64_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), buf_(std::make_shared<std::vector<double>>(std::move(data))) {
    ALISE_CHECK(static_cast<int64_t>(buf_->size()) == count(shape_), "tensor data/shape mismatch");
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : *t.buf_) x = v;
    return t;
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_.at(i); }
  size_t ndim() const { return shape_.size(); }
  int64_t numel() const { return buf_ ? static_cast<int64_t>(buf_->size()) : 0; }
  bool defined() const { return static_cast<bool>(buf_); }

  double* data() { return buf_->data(); }
  const double* data() const { return buf_->data(); }
  double& operator[](int64_t i) { return (*buf_)[i]; }
  double operator[](int64_t i) const { return (*buf_)[i]; }

  /// Same buffer, new shape (element count must match).
  Tensor reshaped(std::vector<int64_t> shape) const {
    ALISE_CHECK(count(shape) == numel(), "reshape count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.buf_ = buf_;
    return t;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.buf_ = std::make_shared<std::vector<double>>(*buf_);
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  static int64_t count(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      ALISE_CHECK(d >= 0, "negative dim");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<int64_t> shape_;
  std::shared_ptr<std::vector<double>> buf_;
};

bool tensor_all_finite(const Tensor& t);

/// Permute axes: out[idx[perm]] = in[idx]. perm maps output axis -> input axis.
Tensor tensor_permute(const Tensor& in, const std::vector<int>& perm);

/// Concatenate along `axis`; all other dims must agree.
Tensor tensor_concat(const std::vector<const Tensor*>& parts, int axis);

/// Slice [start, start+len) along `axis`.
Tensor tensor_slice(const Tensor& in, int axis, int64_t start, int64_t len);

/// Scatter-add `src` (shape of a slice) back into `dst` at `start` along `axis`.
void tensor_slice_add(Tensor& dst, const Tensor& src, int axis, int64_t start);

}  // namespace alise
