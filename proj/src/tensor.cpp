#include "alise/tensor.hpp"

#include <cmath>

namespace alise {

bool tensor_all_finite(const Tensor& t) {
  const double* p = t.data();
  const int64_t n = t.numel();
  for (int64_t i = 0; i < n; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

Tensor tensor_permute(const Tensor& in, const std::vector<int>& perm) {
  const size_t nd = in.ndim();
  ALISE_CHECK(perm.size() == nd, "permute rank mismatch");
  std::vector<int64_t> out_shape(nd);
  for (size_t i = 0; i < nd; ++i) out_shape[i] = in.dim(perm[i]);

  std::vector<int64_t> in_strides(nd, 1);
  for (size_t i = nd - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * in.dim(i);
  std::vector<int64_t> step(nd);  // stride in the input per output axis
  for (size_t i = 0; i < nd; ++i) step[i] = in_strides[perm[i]];

  Tensor out(out_shape);
  std::vector<int64_t> idx(nd, 0);
  const double* src = in.data();
  double* dst = out.data();
  const int64_t n = in.numel();
  int64_t src_off = 0;
  for (int64_t o = 0; o < n; ++o) {
    dst[o] = src[src_off];
    for (int64_t ax = static_cast<int64_t>(nd) - 1; ax >= 0; --ax) {
      src_off += step[ax];
      if (++idx[ax] < out_shape[ax]) break;
      src_off -= step[ax] * out_shape[ax];
      idx[ax] = 0;
    }
  }
  return out;
}

namespace {
// Splits a shape at `axis` into (outer, axis_len, inner) extents.
struct AxisSplit {
  int64_t outer = 1, len = 1, inner = 1;
};
AxisSplit split_at(const std::vector<int64_t>& shape, int axis) {
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}
}  // namespace

Tensor tensor_concat(const std::vector<const Tensor*>& parts, int axis) {
  ALISE_CHECK(!parts.empty(), "concat of nothing");
  std::vector<int64_t> shape = parts[0]->shape();
  int64_t total = 0;
  for (const Tensor* p : parts) {
    ALISE_CHECK(p->ndim() == shape.size(), "concat rank mismatch");
    for (size_t i = 0; i < shape.size(); ++i)
      if (static_cast<int>(i) != axis)
        ALISE_CHECK(p->dim(i) == shape[i], "concat dim " << i << " mismatch");
    total += p->dim(axis);
  }
  shape[axis] = total;
  Tensor out(shape);
  const AxisSplit s = split_at(shape, axis);
  double* dst = out.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    int64_t row = 0;
    for (const Tensor* p : parts) {
      const int64_t plen = p->dim(axis) * s.inner;
      const double* src = p->data() + o * plen;
      double* d = dst + (o * s.len + row) * s.inner;
      for (int64_t i = 0; i < plen; ++i) d[i] = src[i];
      row += p->dim(axis);
    }
  }
  return out;
}

Tensor tensor_slice(const Tensor& in, int axis, int64_t start, int64_t len) {
  ALISE_CHECK(start >= 0 && len >= 0 && start + len <= in.dim(axis), "slice out of range");
  std::vector<int64_t> shape = in.shape();
  shape[axis] = len;
  Tensor out(shape);
  const AxisSplit s = split_at(in.shape(), axis);
  const double* src = in.data();
  double* dst = out.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    const double* sp = src + (o * s.len + start) * s.inner;
    double* dp = dst + o * len * s.inner;
    for (int64_t i = 0; i < len * s.inner; ++i) dp[i] = sp[i];
  }
  return out;
}

void tensor_slice_add(Tensor& dst, const Tensor& src, int axis, int64_t start) {
  ALISE_CHECK(dst.ndim() == src.ndim(), "slice_add rank mismatch");
  const int64_t len = src.dim(axis);
  ALISE_CHECK(start >= 0 && start + len <= dst.dim(axis), "slice_add out of range");
  const AxisSplit s = split_at(dst.shape(), axis);
  const double* sp0 = src.data();
  double* dp0 = dst.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    const double* sp = sp0 + o * len * s.inner;
    double* dp = dp0 + (o * s.len + start) * s.inner;
    for (int64_t i = 0; i < len * s.inner; ++i) dp[i] += sp[i];
  }
}

}  // namespace alise
