#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sdmqkd/kernels.hpp"

using namespace sdmqkd;

namespace {

// Guard that forces a kernel table for one scope.
struct ForcedKernels {
  explicit ForcedKernels(const char* name) { kernels::force(name); }
  ~ForcedKernels() { kernels::force(nullptr); }
};

}  // namespace

TEST_CASE("counter stream is stateless and deterministic") {
  const std::uint64_t key = kernels::derive_key(12345, 7);
  std::vector<double> sequential(64);
  kernels::scalar_table().fill_uniform(key, 100, sequential.size(),
                                       sequential.data());
  for (std::size_t i = 0; i < sequential.size(); ++i) {
    CHECK(sequential[i] == kernels::uniform_at(key, 100 + i));
    CHECK(sequential[i] >= 0.0);
    CHECK(sequential[i] < 1.0);
  }
  // Random access equals sequential generation at any offset.
  std::vector<double> shifted(16);
  kernels::scalar_table().fill_uniform(key, 130, shifted.size(), shifted.data());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    CHECK(shifted[i] == sequential[30 + i]);
  }
}

TEST_CASE("uniform stream has uniform moments") {
  const std::size_t n = 1 << 20;
  std::vector<double> values(n);
  kernels::active().fill_uniform(kernels::derive_key(99, 1), 0, n, values.data());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  // 4-sigma bands around 1/2 and 1/12.
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / double(n)));
  CHECK(std::abs(var - 1.0 / 12.0) < 4.0 * 0.0745 / std::sqrt(double(n)));
}

TEST_CASE("scalar and SIMD kernels are bit-exact equivalents") {
  const kernels::KernelTable* simd = kernels::avx2_table();
  if (simd == nullptr || !kernels::avx2_available()) {
    MESSAGE("AVX2 unavailable; equivalence suite covers scalar only");
    return;
  }
  std::mt19937_64 gen(2024);

  SUBCASE("fill_uniform") {
    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 5ul, 31ul, 64ul, 1000ul, 4097ul}) {
      const std::uint64_t key = gen();
      const std::uint64_t counter = gen() % 1000000;
      std::vector<double> a(n + 1, -1.0);
      std::vector<double> b(n + 1, -1.0);
      kernels::scalar_table().fill_uniform(key, counter, n, a.data());
      simd->fill_uniform(key, counter, n, b.data());
      CHECK(a == b);
    }
  }

  SUBCASE("sample_clicks") {
    std::vector<double> table(48);
    for (double& t : table) {
      t = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    }
    for (std::size_t n : {0ul, 1ul, 5ul, 16ul, 501ul, 4096ul}) {
      std::vector<std::int32_t> idx0(n);
      std::vector<std::int32_t> idx1(n);
      std::vector<double> xt(n);
      std::vector<double> u0(n);
      std::vector<double> u1(n);
      for (std::size_t i = 0; i < n; ++i) {
        idx0[i] = static_cast<std::int32_t>(gen() % table.size());
        idx1[i] = static_cast<std::int32_t>(gen() % table.size());
        xt[i] = std::uniform_real_distribution<double>(0.9, 1.0)(gen);
        u0[i] = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
        u1[i] = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      }
      std::vector<std::uint8_t> a0(n), a1(n), b0(n), b1(n);
      kernels::scalar_table().sample_clicks(n, idx0.data(), idx1.data(),
                                            xt.data(), u0.data(), u1.data(),
                                            table.data(), a0.data(), a1.data());
      simd->sample_clicks(n, idx0.data(), idx1.data(), xt.data(), u0.data(),
                          u1.data(), table.data(), b0.data(), b1.data());
      CHECK(a0 == b0);
      CHECK(a1 == b1);
    }
  }

  SUBCASE("xor_popcount") {
    for (std::size_t nwords : {0ul, 1ul, 2ul, 3ul, 4ul, 5ul, 17ul, 64ul, 129ul}) {
      std::vector<std::uint64_t> a(nwords);
      std::vector<std::uint64_t> b(nwords);
      for (std::size_t i = 0; i < nwords; ++i) {
        a[i] = gen();
        b[i] = gen();
      }
      const std::uint64_t scalar =
          kernels::scalar_table().xor_popcount(a.data(), b.data(), nwords);
      CHECK(scalar == simd->xor_popcount(a.data(), b.data(), nwords));

      // Plain bit-loop oracle.
      std::uint64_t expected = 0;
      for (std::size_t i = 0; i < nwords; ++i) {
        std::uint64_t x = a[i] ^ b[i];
        while (x != 0) {
          expected += x & 1ull;
          x >>= 1;
        }
      }
      CHECK(scalar == expected);
    }
  }
}

TEST_CASE("kernel dispatch can be forced") {
  {
    ForcedKernels guard("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
  }
  if (kernels::avx2_available()) {
    ForcedKernels guard("avx2");
    CHECK(std::string(kernels::active().name) == "avx2");
  }
}
