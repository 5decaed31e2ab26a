#include "sdmqkd/qstate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdmqkd {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

double norm_squared(const CorePairState& s) {
  return std::norm(s.amp_a) + std::norm(s.amp_b);
}

void require_normalized(const CorePairState& s, const char* where) {
  if (!is_normalized(s)) {
    throw std::invalid_argument(std::string(where) +
                                ": state amplitudes are not normalized");
  }
}

}  // namespace

bool is_normalized(const CorePairState& state, double tol) {
  return std::abs(norm_squared(state) - 1.0) <= tol;
}

CorePairState prepare_state(int bit, Basis basis) {
  if (bit != 0 && bit != 1) {
    throw std::invalid_argument("prepare_state: bit must be 0 or 1");
  }
  if (basis == Basis::X) {
    return bit == 0 ? CorePairState{1.0, 0.0} : CorePairState{0.0, 1.0};
  }
  const double sign = bit == 0 ? 1.0 : -1.0;
  return CorePairState{kInvSqrt2, sign * kInvSqrt2};
}

CorePairState mzi_transfer(const MziSetting& setting, const CorePairState& state) {
  const double half = 0.5 * setting.theta;
  const std::complex<double> c = std::cos(half);
  const std::complex<double> is = kI * std::sin(half);
  const std::complex<double> phase = std::exp(kI * setting.phi);
  return CorePairState{phase * (c * state.amp_a + is * state.amp_b),
                       is * state.amp_a + c * state.amp_b};
}

std::array<double, 2> measurement_probabilities(const CorePairState& state,
                                                Basis basis) {
  require_normalized(state, "measurement_probabilities");
  if (basis == Basis::X) {
    return {std::norm(state.amp_a), std::norm(state.amp_b)};
  }
  const std::complex<double> plus = (state.amp_a + state.amp_b) * kInvSqrt2;
  const std::complex<double> minus = (state.amp_a - state.amp_b) * kInvSqrt2;
  return {std::norm(plus), std::norm(minus)};
}

double mub_overlap(const CorePairState& s1, const CorePairState& s2) {
  require_normalized(s1, "mub_overlap");
  require_normalized(s2, "mub_overlap");
  const std::complex<double> inner =
      std::conj(s1.amp_a) * s2.amp_a + std::conj(s1.amp_b) * s2.amp_b;
  return std::norm(inner);
}

}  // namespace sdmqkd
