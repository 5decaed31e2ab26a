#include "sdmqkd/kernels.hpp"

#include <bit>

namespace sdmqkd::kernels {

namespace {

void fill_uniform_scalar(std::uint64_t key, std::uint64_t counter0,
                         std::size_t n, double* out) {
  // Incremental form of stream_value: the argument of mix64 advances by
  // kGolden per element, matching key + kGolden * (counter0 + i) exactly.
  std::uint64_t x = key + kGolden * counter0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = to_unit_double(mix64(x));
    x += kGolden;
  }
}

void sample_clicks_scalar(std::size_t n, const std::int32_t* idx0,
                          const std::int32_t* idx1, const double* xt,
                          const double* u0, const double* u1,
                          const double* noclick9, std::uint8_t* click0,
                          std::uint8_t* click1) {
  for (std::size_t i = 0; i < n; ++i) {
    const double nc0 = noclick9[idx0[i]] * xt[i];
    const double nc1 = noclick9[idx1[i]] * xt[i];
    click0[i] = u0[i] >= nc0 ? 1 : 0;
    click1[i] = u1[i] >= nc1 ? 1 : 0;
  }
}

std::uint64_t xor_popcount_scalar(const std::uint64_t* a,
                                  const std::uint64_t* b, std::size_t nwords) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < nwords; ++i) {
    total += std::popcount(a[i] ^ b[i]);
  }
  return total;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{fill_uniform_scalar, sample_clicks_scalar,
                                 xor_popcount_scalar, "scalar"};
  return table;
}

}  // namespace sdmqkd::kernels
