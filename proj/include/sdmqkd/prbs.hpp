#pragma once

#include <cstdint>

// Maximal-length Fibonacci LFSR, the model of the FPGA pattern generator
// that drives the transmitter MZIs. One generator per core pair keeps the
// parallel keys independent.

namespace sdmqkd {

class Prbs {
 public:
  // Generic two-tap feedback x^degree + x^tap + 1. The seed must be a
  // nonzero register value (only the low `degree` bits are used).
  Prbs(int degree, int tap, std::uint64_t seed);

  // PRBS-31: x^31 + x^28 + 1.
  static Prbs prbs31(std::uint32_t seed) { return Prbs(31, 28, seed); }
  // PRBS-7: x^7 + x^6 + 1 (short-period variant used for exhaustive tests).
  static Prbs prbs7(std::uint32_t seed) { return Prbs(7, 6, seed); }

  // One shift-register step; returns the output bit (the register MSB
  // before the shift).
  int next();

  // Next `count` bits packed MSB-first into an integer, count <= 32.
  std::uint32_t next_bits(int count);

  std::uint64_t state() const { return state_; }

 private:
  int degree_;
  int tap_;
  std::uint64_t mask_;
  std::uint64_t state_;
};

}  // namespace sdmqkd
