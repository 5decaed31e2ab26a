#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "sdmqkd/channel.hpp"
#include "sdmqkd/protocol.hpp"

// Information-theoretic post-processing: entropies, mutual information,
// vacuum+weak decoy bounds on the single-photon yield and error rate, the
// secret-key rate, and MUB tomography with its classical fidelity figure.

namespace sdmqkd {

// One-way reconciliation QBER threshold against coherent attacks.
inline constexpr double kCoherentAttackQberLimit = 0.11;

// Error-correction inefficiency default.
inline constexpr double kDefaultErrorCorrectionFactor = 1.22;

// h2(p) = -p log2 p - (1-p) log2(1-p), continuous at the endpoints.
// Throws std::invalid_argument outside [0, 1].
double binary_entropy(double p);

// I(X;Y) in bits from a 2x2 joint probability table (rows: X, cols: Y).
// Throws std::invalid_argument when the table is not a distribution.
double mutual_information(const std::array<std::array<double, 2>, 2>& joint);

struct DecoyBoundsResult {
  double y1_lower = 0.0;  // single-photon yield lower bound
  double e1_upper = 0.5;  // single-photon error upper bound
  bool clamped_y1 = false;
  bool clamped_e1 = false;
  // Set when the observed gains cannot support a positive yield bound
  // (or a class was never sent); downstream rates carry the flag instead
  // of aborting long parameter sweeps.
  bool insufficient_statistics = false;
};

// Vacuum+weak-decoy bounds from the measured per-class gains. Throws
// AnalysisError on a degenerate schedule (u ~ v or v <= 0); statistics
// problems are reported through the flags, not exceptions.
DecoyBoundsResult decoy_bounds(const DecoyStatistics& stats,
                               const IntensitySchedule& schedule);

struct KeyRateReport {
  double y1_lower = 0.0;
  double e1_upper = 0.5;
  double q1_lower = 0.0;             // Y1 * u * exp(-u)
  double rate_per_pulse = 0.0;       // may be negative; see secure_key
  double rate_per_second = 0.0;
  double extractable_rate_per_second = 0.0;  // max(0, rate_per_second)
  double qber = 0.0;                 // signal-class QBER
  bool attack_limit_ok = false;      // qber < kCoherentAttackQberLimit
  bool secure_key = false;           // positive rate with usable bounds
  bool clamped = false;
  bool insufficient_statistics = false;
  double f_ec = kDefaultErrorCorrectionFactor;
  // Diagnostic upper envelope: click rate times the binary-symmetric-
  // channel information 1 - h2(QBER), ignoring sifting, multiphoton
  // leakage and error-correction overhead.
  double info_rate_per_second = 0.0;
};

KeyRateReport secret_key_rate(const DecoyStatistics& stats,
                              const DecoyBoundsResult& bounds,
                              const IntensitySchedule& schedule, double f_ec,
                              double rep_rate_hz);

// Bhattacharyya overlap sum_i sqrt(p_i q_i) between two distributions of
// equal length. Throws std::invalid_argument on mismatched lengths or
// vectors that are not normalized (beyond 1e-9).
double classical_fidelity(std::span<const double> p, std::span<const double> q);

// Rows: prepared X0, X1, Z0, Z1. Columns: measured projector (X,0), (X,1),
// (Z,0), (Z,1). Each row is normalized within each measurement basis, so a
// row's X block and Z block each sum to 1.
using TomographyMatrix = std::array<std::array<double, 4>, 4>;

// The noiseless expectation: identity blocks within basis, flat 0.5 across.
TomographyMatrix ideal_tomography_matrix();

struct TomographyConfig {
  std::uint64_t pulses_per_state = 200000;
  double mean_photons = 0.5;
  double basis_prob_x = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t min_cell_counts = 100;  // clicks per (row, basis) block
};

struct TomographyResult {
  TomographyMatrix matrix{};
  // Scalar figure of merit: mean over prepared states of the squared
  // Bhattacharyya overlap between the measured and ideal rows in the
  // preparation basis. Cross-basis blocks are flat by symmetry and carry
  // no calibration information, so they are excluded from the scalar and
  // reported through bhattacharyya_mean instead.
  double fidelity = 0.0;
  // Mean Bhattacharyya overlap over all 8 (row, measurement basis) blocks.
  double bhattacharyya_mean = 0.0;
  std::uint64_t min_block_clicks = 0;
};

// Scans all four prepared states against both measurement bases over one
// core pair and bins the conditional outcome frequencies. Throws
// AnalysisError when any (row, basis) block has fewer clicks than
// min_cell_counts.
TomographyResult run_tomography(const TomographyConfig& config,
                                const ChannelParams& params);

}  // namespace sdmqkd
