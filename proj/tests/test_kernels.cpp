#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "alise/kernels.hpp"
#include "alise/rng.hpp"

using namespace alise;

namespace {

std::vector<double> random_vec(size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

void check_close(double a, double b, double tol = 1e-12) {
  const double denom = std::max({1.0, std::abs(a), std::abs(b)});
  CHECK(std::abs(a - b) / denom <= tol);
}

void check_close_vec(const std::vector<double>& a, const std::vector<double>& b,
                     double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) check_close(a[i], b[i], tol);
}

// reference three-loop matmuls
void naive_nn(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& c,
              size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[p * n + j];
}
void naive_nt(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& c,
              size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t p = 0; p < k; ++p) c[i * n + j] += a[i * k + p] * b[j * k + p];
}
void naive_tn(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& c,
              size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t p = 0; p < k; ++p) c[i * n + j] += a[p * m + i] * b[p * n + j];
}

const size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 64, 100, 257};

}  // namespace

TEST_CASE("scalar gemm variants match the naive triple loop") {
  Rng rng(7);
  const auto& K = kern::scalar_ops();
  const size_t dims[][3] = {{1, 1, 1}, {2, 3, 4}, {5, 7, 3}, {8, 16, 8}, {13, 90, 17}};
  for (const auto& d : dims) {
    const size_t m = d[0], k = d[1], n = d[2];
    auto a = random_vec(m * k, rng);
    auto b = random_vec(k * n, rng);
    std::vector<double> want(m * n, 0.0), got(m * n, 0.0);

    naive_nn(a, b, want, m, k, n);
    K.gemm_nn(a.data(), b.data(), got.data(), m, k, n);
    check_close_vec(want, got, 1e-13);

    auto bt = random_vec(n * k, rng);
    std::fill(want.begin(), want.end(), 0.0);
    std::fill(got.begin(), got.end(), 0.0);
    naive_nt(a, bt, want, m, k, n);
    K.gemm_nt(a.data(), bt.data(), got.data(), m, k, n);
    check_close_vec(want, got, 1e-13);

    auto at = random_vec(k * m, rng);
    std::fill(want.begin(), want.end(), 0.0);
    std::fill(got.begin(), got.end(), 0.0);
    naive_tn(at, b, want, m, k, n);
    K.gemm_tn(at.data(), b.data(), got.data(), m, k, n);
    check_close_vec(want, got, 1e-13);
  }
}

TEST_CASE("gemm accumulates into the output") {
  const auto& K = kern::ops();
  std::vector<double> a = {1.0, 2.0}, b = {3.0, 4.0};
  std::vector<double> c = {10.0};
  K.gemm_nn(a.data(), b.data(), c.data(), 1, 2, 1);
  check_close(c[0], 10.0 + 11.0);
}

TEST_CASE("simd table matches the scalar reference elementwise") {
  const kern::Ops* simd = kern::avx2_ops();
  if (simd == nullptr) {
    MESSAGE("avx2 kernels not built on this platform; reference-only run");
    return;
  }
  const auto& S = kern::scalar_ops();
  Rng rng(99);
  for (size_t n : kSizes) {
    auto a = random_vec(n, rng, 3.0);
    auto b = random_vec(n, rng, 3.0);
    if (n > 0) {
      check_close(S.dot(a.data(), b.data(), n), simd->dot(a.data(), b.data(), n));
      check_close(S.sum(a.data(), n), simd->sum(a.data(), n));
      check_close(S.sumsq(a.data(), n), simd->sumsq(a.data(), n));
      CHECK(S.vmax(a.data(), n) == simd->vmax(a.data(), n));
    }
    std::vector<double> o1(n), o2(n);
    S.add(a.data(), b.data(), o1.data(), n);
    simd->add(a.data(), b.data(), o2.data(), n);
    check_close_vec(o1, o2);
    S.sub(a.data(), b.data(), o1.data(), n);
    simd->sub(a.data(), b.data(), o2.data(), n);
    check_close_vec(o1, o2);
    S.mul(a.data(), b.data(), o1.data(), n);
    simd->mul(a.data(), b.data(), o2.data(), n);
    check_close_vec(o1, o2);
    S.scale(a.data(), 1.7, o1.data(), n);
    simd->scale(a.data(), 1.7, o2.data(), n);
    check_close_vec(o1, o2);
    S.relu(a.data(), o1.data(), n);
    simd->relu(a.data(), o2.data(), n);
    check_close_vec(o1, o2);

    auto y1 = random_vec(n, rng);
    auto y2 = y1;
    S.axpy(0.37, a.data(), y1.data(), n);
    simd->axpy(0.37, a.data(), y2.data(), n);
    check_close_vec(y1, y2);

    auto g1 = random_vec(n, rng);
    auto g2 = g1;
    S.relu_bwd(a.data(), b.data(), g1.data(), n);
    simd->relu_bwd(a.data(), b.data(), g2.data(), n);
    check_close_vec(g1, g2);
  }
}

TEST_CASE("simd gemm matches the scalar reference") {
  const kern::Ops* simd = kern::avx2_ops();
  if (simd == nullptr) return;
  const auto& S = kern::scalar_ops();
  Rng rng(311);
  const size_t dims[][3] = {{1, 1, 1},  {3, 5, 2},   {4, 4, 4},   {7, 13, 19},
                            {16, 9, 16}, {32, 90, 17}, {5, 144, 33}, {2, 64, 61}};
  for (const auto& d : dims) {
    const size_t m = d[0], k = d[1], n = d[2];
    auto a = random_vec(m * k, rng);
    auto b = random_vec(k * n, rng);
    auto bt = random_vec(n * k, rng);
    auto at = random_vec(k * m, rng);
    std::vector<double> c1(m * n, 0.5), c2(m * n, 0.5);

    S.gemm_nn(a.data(), b.data(), c1.data(), m, k, n);
    simd->gemm_nn(a.data(), b.data(), c2.data(), m, k, n);
    check_close_vec(c1, c2);

    std::fill(c1.begin(), c1.end(), -0.25);
    std::fill(c2.begin(), c2.end(), -0.25);
    S.gemm_nt(a.data(), bt.data(), c1.data(), m, k, n);
    simd->gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
    check_close_vec(c1, c2);

    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    S.gemm_tn(at.data(), b.data(), c1.data(), m, k, n);
    simd->gemm_tn(at.data(), b.data(), c2.data(), m, k, n);
    check_close_vec(c1, c2);
  }
}

TEST_CASE("isa selection is forceable and reports its name") {
  const std::string_view before = kern::active_isa();
  kern::force_isa("scalar");
  CHECK(kern::active_isa() == "scalar");
  if (kern::avx2_ops() != nullptr) {
    kern::force_isa("avx2");
    CHECK(kern::active_isa() == "avx2");
  }
  kern::force_isa("auto");
  CHECK(kern::active_isa() == before);
  CHECK_THROWS(kern::force_isa("mmx"));
}
