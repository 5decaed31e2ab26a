#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sdmqkd/channel.hpp"
#include "sdmqkd/prbs.hpp"
#include "sdmqkd/qstate.hpp"

// Full decoy-state BB84 sessions over N/2 parallel core pairs: PRBS-driven
// state preparation, per-pulse intensity scheduling, the stochastic channel,
// basis sifting and per-intensity-class statistics.
//
// Randomness layout. Every stochastic draw comes from a counter-based
// stream addressed by (master seed, core pair, purpose, pulse index), so a
// session is a pure function of its configuration: identical seeds give
// bit-identical results regardless of kernel variant, block size or
// sharding. Alice's bit and basis come from her PRBS instead: 1 bit for
// the key bit, then 16 bits (MSB first) compared against a 16-bit
// threshold for the basis choice. The PRBS consumption rate is therefore
// fixed at 17 bits per pulse, independent of the intensity class.

namespace sdmqkd {

enum class IntensityClass : std::uint8_t { Signal = 0, Decoy = 1, Vacuum = 2 };

inline constexpr std::array<const char*, 3> kClassLabels = {"u", "v", "vac"};

struct IntensitySchedule {
  double signal_mu = 0.5;  // mean photon number of signal pulses
  double decoy_mu = 0.25;  // mean photon number of decoy pulses
  double p_signal = 0.7;
  double p_decoy = 0.2;
  double p_vacuum = 0.1;

  void validate() const;
  double mu_of(IntensityClass cls) const;
};

struct PulseRecord {
  std::uint64_t pulse_index = 0;
  std::uint32_t core_pair = 0;
  IntensityClass cls = IntensityClass::Signal;
  Basis basis = Basis::X;
  std::uint8_t bit = 0;  // retained for vacuum pulses too (bookkeeping only)
};

struct ClassCounts {
  std::uint64_t sent = 0;
  std::uint64_t clicked = 0;
  std::uint64_t sifted = 0;
  std::uint64_t errors = 0;
};

struct DecoyStatistics {
  std::array<ClassCounts, 3> per_class;

  ClassCounts& operator[](IntensityClass cls) {
    return per_class[static_cast<std::size_t>(cls)];
  }
  const ClassCounts& operator[](IntensityClass cls) const {
    return per_class[static_cast<std::size_t>(cls)];
  }

  double gain(IntensityClass cls) const;        // clicked / sent
  double qber(IntensityClass cls) const;        // errors / sifted
  double measured_vacuum_yield() const { return gain(IntensityClass::Vacuum); }
  std::uint64_t total_sent() const;

  void validate() const;  // throws on count-ordering violations
};

// Packed bit sequence; word layout feeds the popcount kernels directly.
class BitSeq {
 public:
  void push_back(bool bit);
  bool bit(std::size_t i) const;
  std::size_t size() const { return size_; }
  const std::uint64_t* words() const { return words_.data(); }
  std::size_t word_count() const { return words_.size(); }
  bool operator==(const BitSeq& other) const;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

// Hamming distance; sequences must have equal length.
std::uint64_t hamming_distance(const BitSeq& a, const BitSeq& b);

// Correlation of +/-1-mapped bits over the common prefix, in [-1, 1].
double bit_cross_correlation(const BitSeq& a, const BitSeq& b);

struct SiftedBatch {
  BitSeq alice_bits;
  BitSeq bob_bits;
};

struct SiftResult {
  std::array<SiftedBatch, 3> per_class;
  DecoyStatistics counts;

  SiftedBatch& batch(IntensityClass cls) {
    return per_class[static_cast<std::size_t>(cls)];
  }
  const SiftedBatch& batch(IntensityClass cls) const {
    return per_class[static_cast<std::size_t>(cls)];
  }
};

// Bob's outcome for a clicked detection: the firing detector's bit, or a
// uniformly random bit for double clicks, drawn from the counter stream
// `resolve_key` at the pulse index. Requires at least one click.
int resolve_bob_bit(const DetectionRecord& detection, std::uint64_t resolve_key);

// Keeps basis-matched clicked pulses, resolves double clicks through
// resolve_bob_bit, and partitions the survivors by intensity class.
// Throws on length mismatch between the two sequences.
SiftResult sift(std::span<const PulseRecord> alice,
                std::span<const DetectionRecord> bob,
                std::uint64_t resolve_key);

// Hamming distance / length. Throws AnalysisError on an empty batch.
double estimate_qber(const SiftedBatch& batch);

// Stream keys and default PRBS seed of one core pair, all derived from the
// master seed.
struct PairStreams {
  std::uint64_t class_key;
  std::uint64_t bob_basis_key;
  std::uint64_t click0_key;
  std::uint64_t click1_key;
  std::uint64_t resolve_key;
  std::uint32_t default_prbs_seed;  // nonzero 31-bit
};

PairStreams pair_streams(std::uint64_t master_seed, std::uint32_t pair);

struct PairSetup {
  ChannelParams channel;
  IntensitySchedule schedule;
  std::uint32_t prbs_seed = 0;  // 0 = derive from the master seed
};

struct SessionConfig {
  std::uint64_t n_pulses = 0;
  double rep_rate_hz = 5000.0;
  double basis_prob_x = 0.5;  // both sides, in (0, 1)
  std::uint64_t master_seed = 1;
  std::vector<PairSetup> pairs;

  void validate() const;
};

struct PairSessionResult {
  DecoyStatistics stats;
  std::array<SiftedBatch, 3> sifted;

  const SiftedBatch& batch(IntensityClass cls) const {
    return sifted[static_cast<std::size_t>(cls)];
  }
};

// One pulse as seen by the session log: transmitter choices, receiver
// clicks, and Bob's resolved bit (-1 when nothing clicked).
struct LoggedPulse {
  PulseRecord pulse;
  DetectionRecord detection;
  int bob_bit = -1;
};

using PulseSink = std::function<void(const LoggedPulse&)>;

// Runs the session for every core pair. Core pairs are coupled only
// through the crosstalk leak-in terms; all randomness is counter-based,
// so results are reproducible bit for bit.
std::vector<PairSessionResult> run_session(const SessionConfig& config,
                                           const PulseSink* sink = nullptr);

}  // namespace sdmqkd
