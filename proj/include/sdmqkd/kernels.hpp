#pragma once

#include <cstddef>
#include <cstdint>

// Hot-loop kernels of the Monte Carlo engine. Every kernel exists as a
// scalar reference implementation and, on x86-64, as an AVX2 variant
// selected at runtime. The two variants are bit-exact equivalents: all
// kernels are built from integer hashing, IEEE multiplies and compares
// (no transcendentals inside the loop), so the dispatch choice never
// changes simulation output.

namespace sdmqkd::kernels {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 output function (Vigna). Used both as the counter-based
// generator core and for deriving stream keys from the master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Value of stream `key` at position `counter`. Stateless, so pulse blocks
// can be generated in any order or in parallel with identical results.
inline std::uint64_t stream_value(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + kGolden * counter);
}

// Uniform double in [0,1) from the top 52 bits; the int-to-double
// conversion is exact, which keeps scalar and SIMD variants bit-equal.
inline double to_unit_double(std::uint64_t z) {
  return static_cast<double>(z >> 12) * 0x1.0p-52;
}

inline double uniform_at(std::uint64_t key, std::uint64_t counter) {
  return to_unit_double(stream_value(key, counter));
}

// Derives a child key; `tag` distinguishes sibling streams.
inline std::uint64_t derive_key(std::uint64_t base, std::uint64_t tag) {
  return mix64(base + kGolden * (tag + 1));
}

struct KernelTable {
  // out[i] = uniform_at(key, counter0 + i)
  void (*fill_uniform)(std::uint64_t key, std::uint64_t counter0, std::size_t n,
                       double* out);

  // Per-pulse detector click sampling. noclick9 holds the per-detector
  // no-click probabilities indexed by (intensity class * 3 + outcome case);
  // xt[i] is the accumulated crosstalk leak-in survival factor.
  //   click_d[i] = u_d[i] >= noclick9[idx_d[i]] * xt[i]
  void (*sample_clicks)(std::size_t n, const std::int32_t* idx0,
                        const std::int32_t* idx1, const double* xt,
                        const double* u0, const double* u1,
                        const double* noclick9, std::uint8_t* click0,
                        std::uint8_t* click1);

  // Hamming distance between packed bit vectors.
  std::uint64_t (*xor_popcount)(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t nwords);

  const char* name;
};

const KernelTable& scalar_table();

bool avx2_available();                // CPU supports AVX2 and it was built in
const KernelTable* avx2_table();      // nullptr when unavailable

// Active table: AVX2 when available, otherwise scalar. The environment
// variable SDMQKD_KERNELS=scalar|avx2 or force() override the choice.
const KernelTable& active();
void force(const char* name);         // nullptr restores auto-detection

}  // namespace sdmqkd::kernels
