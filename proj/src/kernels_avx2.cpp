// AVX2 kernel variants. Compiled with -mavx2 on x86-64 only; callers reach
// them through the runtime dispatch table, never directly.

#include "sdmqkd/kernels.hpp"

#ifdef SDMQKD_BUILD_AVX2

#include <immintrin.h>

#include <bit>

namespace sdmqkd::kernels {

namespace {

// 64-bit modular multiply from 32-bit pieces (no _mm256_mullo_epi64 in AVX2).
inline __m256i mul64(__m256i a, __m256i b) {
  const __m256i a_hi = _mm256_srli_epi64(a, 32);
  const __m256i b_hi = _mm256_srli_epi64(b, 32);
  const __m256i lolo = _mm256_mul_epu32(a, b);
  const __m256i lohi = _mm256_mul_epu32(a, b_hi);
  const __m256i hilo = _mm256_mul_epu32(a_hi, b);
  const __m256i cross = _mm256_add_epi64(lohi, hilo);
  return _mm256_add_epi64(lolo, _mm256_slli_epi64(cross, 32));
}

inline __m256i mix64_vec(__m256i z) {
  const __m256i m1 = _mm256_set1_epi64x(static_cast<long long>(0xBF58476D1CE4E5B9ull));
  const __m256i m2 = _mm256_set1_epi64x(static_cast<long long>(0x94D049BB133111EBull));
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
  z = mul64(z, m1);
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
  z = mul64(z, m2);
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
  return z;
}

// Exact uint64 (< 2^52 after the shift) to double, then scale by 2^-52.
// Both steps are exact, so this matches the scalar conversion bit for bit.
inline __m256d to_unit_double_vec(__m256i z) {
  const __m256d magic = _mm256_set1_pd(0x1.0p52);
  const __m256i mant = _mm256_srli_epi64(z, 12);
  const __m256i bits = _mm256_or_si256(mant, _mm256_castpd_si256(magic));
  const __m256d value = _mm256_sub_pd(_mm256_castsi256_pd(bits), magic);
  return _mm256_mul_pd(value, _mm256_set1_pd(0x1.0p-52));
}

void fill_uniform_avx2(std::uint64_t key, std::uint64_t counter0, std::size_t n,
                       double* out) {
  const std::uint64_t base = key + kGolden * counter0;
  __m256i x = _mm256_setr_epi64x(
      static_cast<long long>(base), static_cast<long long>(base + kGolden),
      static_cast<long long>(base + 2 * kGolden),
      static_cast<long long>(base + 3 * kGolden));
  const __m256i step = _mm256_set1_epi64x(static_cast<long long>(4 * kGolden));

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, to_unit_double_vec(mix64_vec(x)));
    x = _mm256_add_epi64(x, step);
  }
  for (; i < n; ++i) {
    out[i] = to_unit_double(mix64(base + kGolden * i));
  }
}

void sample_clicks_avx2(std::size_t n, const std::int32_t* idx0,
                        const std::int32_t* idx1, const double* xt,
                        const double* u0, const double* u1,
                        const double* noclick9, std::uint8_t* click0,
                        std::uint8_t* click1) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m128i vidx0 =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx0 + i));
    const __m128i vidx1 =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx1 + i));
    const __m256d vxt = _mm256_loadu_pd(xt + i);
    const __m256d nc0 =
        _mm256_mul_pd(_mm256_i32gather_pd(noclick9, vidx0, 8), vxt);
    const __m256d nc1 =
        _mm256_mul_pd(_mm256_i32gather_pd(noclick9, vidx1, 8), vxt);
    const int m0 = _mm256_movemask_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(u0 + i), nc0, _CMP_GE_OQ));
    const int m1 = _mm256_movemask_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(u1 + i), nc1, _CMP_GE_OQ));
    for (int lane = 0; lane < 4; ++lane) {
      click0[i + lane] = static_cast<std::uint8_t>((m0 >> lane) & 1);
      click1[i + lane] = static_cast<std::uint8_t>((m1 >> lane) & 1);
    }
  }
  for (; i < n; ++i) {
    click0[i] = u0[i] >= noclick9[idx0[i]] * xt[i] ? 1 : 0;
    click1[i] = u1[i] >= noclick9[idx1[i]] * xt[i] ? 1 : 0;
  }
}

// Nibble-LUT popcount with SAD accumulation.
std::uint64_t xor_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t nwords) {
  const __m256i lut =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1,
                       2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i zero = _mm256_setzero_si256();

  __m256i acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= nwords; i += 4) {
    const __m256i xa =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i xb =
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i x = _mm256_xor_si256(xa, xb);
    const __m256i lo = _mm256_and_si256(x, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(x, 4), low_mask);
    const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo),
                                        _mm256_shuffle_epi8(lut, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, zero));
  }

  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < nwords; ++i) {
    total += std::popcount(a[i] ^ b[i]);
  }
  return total;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{fill_uniform_avx2, sample_clicks_avx2,
                                 xor_popcount_avx2, "avx2"};
  return &table;
}

}  // namespace sdmqkd::kernels

#endif  // SDMQKD_BUILD_AVX2
