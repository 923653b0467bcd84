// AVX2+FMA variants of the kernel table. Compiled with -mavx2 -mfma in its
// own TU; only reached through the dispatcher after a runtime CPU check.

#include <immintrin.h>

#include "alise/kernels.hpp"

namespace alise::kern {
namespace avx2 {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const double* x, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq(const double* x, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
  }
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double vmax(const double* x, size_t n) {
  size_t i = 0;
  double m = x[0];
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
    __m128d lo = _mm_max_pd(_mm256_castpd256_pd128(vm), _mm256_extractf128_pd(vm, 1));
    m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

void add(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(const double* x, double s, double* out, size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  for (; i < n; ++i) out[i] = x[i] * s;
}

void axpy(double a, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void relu(const double* x, double* out, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd(const double* x, const double* gy, double* gx, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    __m256d g = _mm256_and_pd(_mm256_loadu_pd(gy + i), mask);
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.0) gx[i] += gy[i];
}

// Register-blocked i-k-j: C row tile (up to 16 columns, 4 ymm) stays in
// registers across the whole k loop.
void gemm_nn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  size_t j0 = 0;
  for (; j0 + 16 <= n; j0 += 16) {
    for (size_t i = 0; i < m; ++i) {
      double* ci = c + i * n + j0;
      __m256d c0 = _mm256_loadu_pd(ci);
      __m256d c1 = _mm256_loadu_pd(ci + 4);
      __m256d c2 = _mm256_loadu_pd(ci + 8);
      __m256d c3 = _mm256_loadu_pd(ci + 12);
      const double* ai = a + i * k;
      for (size_t p = 0; p < k; ++p) {
        const __m256d va = _mm256_set1_pd(ai[p]);
        const double* bp = b + p * n + j0;
        c0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + 4), c1);
        c2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + 8), c2);
        c3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(bp + 12), c3);
      }
      _mm256_storeu_pd(ci, c0);
      _mm256_storeu_pd(ci + 4, c1);
      _mm256_storeu_pd(ci + 8, c2);
      _mm256_storeu_pd(ci + 12, c3);
    }
  }
  for (; j0 + 4 <= n; j0 += 4) {
    for (size_t i = 0; i < m; ++i) {
      double* ci = c + i * n + j0;
      __m256d c0 = _mm256_loadu_pd(ci);
      const double* ai = a + i * k;
      for (size_t p = 0; p < k; ++p)
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(ai[p]), _mm256_loadu_pd(b + p * n + j0), c0);
      _mm256_storeu_pd(ci, c0);
    }
  }
  if (j0 < n) {
    for (size_t i = 0; i < m; ++i) {
      const double* ai = a + i * k;
      double* ci = c + i * n;
      for (size_t p = 0; p < k; ++p) {
        const double aip = ai[p];
        const double* bp = b + p * n;
        for (size_t j = j0; j < n; ++j) ci[j] += aip * bp[j];
      }
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (size_t j = 0; j < n; ++j) ci[j] += dot(ai, b + j * k, k);
  }
}

void gemm_tn(const double* a, const double* b, double* c, size_t m, size_t k, size_t n) {
  for (size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (size_t i = 0; i < m; ++i) axpy(ap[i], bp, c + i * n, n);
  }
}

}  // namespace avx2

const Ops* avx2_ops() {
  static const Ops table = {
      avx2::dot,  avx2::sum,   avx2::sumsq,    avx2::vmax,    avx2::add,
      avx2::sub,  avx2::mul,   avx2::scale,    avx2::axpy,    avx2::relu,
      avx2::relu_bwd, avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn, "avx2",
  };
  return &table;
}

}  // namespace alise::kern
