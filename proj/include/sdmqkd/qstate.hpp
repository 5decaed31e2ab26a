#pragma once

#include <array>
#include <complex>
#include <cstdint>

// Spatial-mode qubits on one core pair of the multicore fiber, together
// with the tunable Mach-Zehnder beam splitters that prepare and measure
// them. States live on two fiber cores; the X basis is the bare core
// basis, the Z basis the balanced superpositions.

namespace sdmqkd {

enum class Basis : std::uint8_t { X = 0, Z = 1 };

// Normalized two-mode amplitude vector over a core pair.
struct CorePairState {
  std::complex<double> amp_a;
  std::complex<double> amp_b;
};

// Splitting angle and relative phase of one MZI.
//
// Beam-splitter convention (fixed here, referenced by every test):
//   U(theta, phi) = P(phi) * BS(theta)
//   BS(theta) = [[cos(theta/2),  i sin(theta/2)],
//                [i sin(theta/2),  cos(theta/2)]]
//   P(phi)    = diag(exp(i phi), 1)
// theta = 0 is the bar state, theta = pi the cross state, theta = pi/2 the
// balanced splitter. The heater voltages of the physical device map onto
// theta as 0 V -> 0, V_pi/2 -> pi/2, V_pi -> pi.
struct MziSetting {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2*pi)
};

inline constexpr double kNormTolerance = 1e-9;

bool is_normalized(const CorePairState& state, double tol = kNormTolerance);

// BB84 state preparation: basis X yields the bare core states, basis Z the
// balanced superpositions (|A>+|B>)/sqrt(2) for bit 0 and (|A>-|B>)/sqrt(2)
// for bit 1.
CorePairState prepare_state(int bit, Basis basis);

// Applies U(theta, phi) to the amplitude vector.
CorePairState mzi_transfer(const MziSetting& setting, const CorePairState& state);

// Born probabilities of the two outcomes when measuring in the given
// basis. Throws std::invalid_argument if the state is not normalized.
std::array<double, 2> measurement_probabilities(const CorePairState& state,
                                                Basis basis);

// |<s1|s2>|^2. Both states must be normalized.
double mub_overlap(const CorePairState& s1, const CorePairState& s2);

}  // namespace sdmqkd
