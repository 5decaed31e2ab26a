#include "sdmqkd/prbs.hpp"

#include <stdexcept>

#include "sdmqkd/errors.hpp"

namespace sdmqkd {

Prbs::Prbs(int degree, int tap, std::uint64_t seed)
    : degree_(degree),
      tap_(tap),
      mask_((degree >= 64) ? ~0ull : ((1ull << degree) - 1)),
      state_(seed & mask_) {
  if (degree < 2 || degree > 63 || tap < 1 || tap >= degree) {
    throw std::invalid_argument("Prbs: invalid polynomial");
  }
  if (state_ == 0) {
    throw ConfigError("Prbs: the all-zero register state is forbidden");
  }
}

int Prbs::next() {
  const int out = static_cast<int>((state_ >> (degree_ - 1)) & 1ull);
  const std::uint64_t feedback =
      ((state_ >> (degree_ - 1)) ^ (state_ >> (tap_ - 1))) & 1ull;
  state_ = ((state_ << 1) | feedback) & mask_;
  return out;
}

std::uint32_t Prbs::next_bits(int count) {
  std::uint32_t value = 0;
  for (int i = 0; i < count; ++i) {
    value = (value << 1) | static_cast<std::uint32_t>(next());
  }
  return value;
}

}  // namespace sdmqkd
