#pragma once

#include <cstddef>
#include <string_view>

namespace alise::kern {

/// Dense double-precision primitives behind every tensor op. Each entry has
/// a scalar reference implementation and, on x86-64 with AVX2+FMA, a SIMD
/// variant selected once at startup. The two are equivalence-tested; the
/// scalar table stays reachable so tests can compare against it directly.
struct Ops {
  // reductions
  double (*dot)(const double* a, const double* b, size_t n);
  double (*sum)(const double* x, size_t n);
  double (*sumsq)(const double* x, size_t n);
  double (*vmax)(const double* x, size_t n);  // n >= 1

  // elementwise, out may alias inputs
  void (*add)(const double* a, const double* b, double* out, size_t n);
  void (*sub)(const double* a, const double* b, double* out, size_t n);
  void (*mul)(const double* a, const double* b, double* out, size_t n);
  void (*scale)(const double* x, double s, double* out, size_t n);
  void (*axpy)(double a, const double* x, double* y, size_t n);  // y += a*x
  void (*relu)(const double* x, double* out, size_t n);
  void (*relu_bwd)(const double* x, const double* gy, double* gx, size_t n);  // gx += gy*(x>0)

  // C [m][n] += A.B with row-major operands
  void (*gemm_nn)(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);  // A[m][k] B[k][n]
  void (*gemm_nt)(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);  // A[m][k] B[n][k]
  void (*gemm_tn)(const double* a, const double* b, double* c, size_t m, size_t k, size_t n);  // A[k][m] B[k][n]

  const char* name;
};

/// Table selected for this process (AVX2 when the CPU supports it).
const Ops& ops();

/// Reference table, always scalar.
const Ops& scalar_ops();

/// AVX2 table, or nullptr when the binary was built without it.
const Ops* avx2_ops();

/// Name of the active table: "avx2" or "scalar".
std::string_view active_isa();

/// Test hook: "scalar", "avx2" or "auto". Throws if the requested table is
/// unavailable on this machine.
void force_isa(std::string_view which);

}  // namespace alise::kern
