#include "sdmqkd/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

#include "sdmqkd/errors.hpp"
#include "sdmqkd/kernels.hpp"

namespace sdmqkd {

namespace {

constexpr std::size_t kBlock = 4096;

// Outcome-case index per pulse: alice basis, alice bit, bob basis.
inline int combo_index(Basis alice_basis, int bit, Basis bob_basis) {
  return static_cast<int>(alice_basis) * 4 + bit * 2 +
         static_cast<int>(bob_basis);
}

}  // namespace

void IntensitySchedule::validate() const {
  if (!(signal_mu > decoy_mu) || decoy_mu < 0.0) {
    throw ConfigError("schedule: intensities must satisfy u > v >= 0");
  }
  if (p_signal < 0.0 || p_decoy < 0.0 || p_vacuum < 0.0) {
    throw ConfigError("schedule: class probabilities must be >= 0");
  }
  if (std::abs(p_signal + p_decoy + p_vacuum - 1.0) > 1e-12) {
    throw ConfigError("schedule: class probabilities must sum to 1");
  }
}

double IntensitySchedule::mu_of(IntensityClass cls) const {
  switch (cls) {
    case IntensityClass::Signal:
      return signal_mu;
    case IntensityClass::Decoy:
      return decoy_mu;
    case IntensityClass::Vacuum:
      return 0.0;
  }
  return 0.0;
}

double DecoyStatistics::gain(IntensityClass cls) const {
  const ClassCounts& c = (*this)[cls];
  return c.sent == 0 ? 0.0
                     : static_cast<double>(c.clicked) / static_cast<double>(c.sent);
}

double DecoyStatistics::qber(IntensityClass cls) const {
  const ClassCounts& c = (*this)[cls];
  return c.sifted == 0
             ? 0.0
             : static_cast<double>(c.errors) / static_cast<double>(c.sifted);
}

std::uint64_t DecoyStatistics::total_sent() const {
  return per_class[0].sent + per_class[1].sent + per_class[2].sent;
}

void DecoyStatistics::validate() const {
  for (const ClassCounts& c : per_class) {
    if (c.errors > c.sifted || c.sifted > c.clicked || c.clicked > c.sent) {
      throw AnalysisError("decoy statistics violate count ordering "
                          "errors <= sifted <= clicked <= sent");
    }
  }
}

void BitSeq::push_back(bool bit) {
  const std::size_t word = size_ / 64;
  if (word == words_.size()) words_.push_back(0);
  if (bit) words_[word] |= 1ull << (size_ % 64);
  ++size_;
}

bool BitSeq::bit(std::size_t i) const {
  return (words_[i / 64] >> (i % 64)) & 1ull;
}

bool BitSeq::operator==(const BitSeq& other) const {
  return size_ == other.size_ && words_ == other.words_;
}

std::uint64_t hamming_distance(const BitSeq& a, const BitSeq& b) {
  if (a.size() != b.size()) {
    throw AnalysisError("hamming_distance: length mismatch");
  }
  return kernels::active().xor_popcount(a.words(), b.words(), a.word_count());
}

double bit_cross_correlation(const BitSeq& a, const BitSeq& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) throw AnalysisError("bit_cross_correlation: empty sequence");

  const std::size_t full_words = n / 64;
  std::uint64_t distance =
      kernels::active().xor_popcount(a.words(), b.words(), full_words);
  const std::size_t tail = n % 64;
  if (tail != 0) {
    const std::uint64_t mask = (1ull << tail) - 1;
    const std::uint64_t xw = (a.words()[full_words] ^ b.words()[full_words]) & mask;
    distance += std::popcount(xw);
  }
  // Mapping bits to +/-1 turns agreement counting into this linear form.
  return 1.0 - 2.0 * static_cast<double>(distance) / static_cast<double>(n);
}

int resolve_bob_bit(const DetectionRecord& detection, std::uint64_t resolve_key) {
  if (!detection.clicked_0 && !detection.clicked_1) {
    throw AnalysisError("resolve_bob_bit: no detector clicked");
  }
  if (detection.clicked_0 && detection.clicked_1) {
    return kernels::uniform_at(resolve_key, detection.pulse_index) < 0.5 ? 0 : 1;
  }
  return detection.clicked_0 ? 0 : 1;
}

namespace {

// Shared per-pulse sifting step used by the public sift() and the session
// engine, so both paths apply exactly the same rules.
inline int sift_one(const PulseRecord& pulse, const DetectionRecord& detection,
                    std::uint64_t resolve_key, DecoyStatistics& counts,
                    std::array<SiftedBatch, 3>& batches) {
  ClassCounts& c = counts[pulse.cls];
  c.sent += 1;
  if (!detection.clicked_0 && !detection.clicked_1) return -1;
  c.clicked += 1;
  const int bob_bit = resolve_bob_bit(detection, resolve_key);
  if (pulse.basis != detection.basis) return bob_bit;
  c.sifted += 1;
  SiftedBatch& batch = batches[static_cast<std::size_t>(pulse.cls)];
  batch.alice_bits.push_back(pulse.bit != 0);
  batch.bob_bits.push_back(bob_bit != 0);
  if (static_cast<int>(pulse.bit) != bob_bit) c.errors += 1;
  return bob_bit;
}

}  // namespace

SiftResult sift(std::span<const PulseRecord> alice,
                std::span<const DetectionRecord> bob,
                std::uint64_t resolve_key) {
  if (alice.size() != bob.size()) {
    throw AnalysisError("sift: record sequences have different lengths");
  }
  SiftResult result;
  for (std::size_t i = 0; i < alice.size(); ++i) {
    sift_one(alice[i], bob[i], resolve_key, result.counts, result.per_class);
  }
  result.counts.validate();
  return result;
}

double estimate_qber(const SiftedBatch& batch) {
  if (batch.alice_bits.size() == 0) {
    throw AnalysisError("estimate_qber: empty sifted batch");
  }
  return static_cast<double>(hamming_distance(batch.alice_bits, batch.bob_bits)) /
         static_cast<double>(batch.alice_bits.size());
}

PairStreams pair_streams(std::uint64_t master_seed, std::uint32_t pair) {
  using kernels::derive_key;
  const std::uint64_t base = derive_key(master_seed, pair);
  PairStreams s;
  s.class_key = derive_key(base, 1);
  s.bob_basis_key = derive_key(base, 2);
  s.click0_key = derive_key(base, 3);
  s.click1_key = derive_key(base, 4);
  s.resolve_key = derive_key(base, 5);
  const std::uint32_t raw =
      static_cast<std::uint32_t>(derive_key(base, 6) & 0x7FFFFFFFull);
  s.default_prbs_seed = raw == 0 ? 1u : raw;
  return s;
}

void SessionConfig::validate() const {
  if (pairs.empty()) throw ConfigError("session: n_core_pairs must be >= 1");
  if (!(basis_prob_x > 0.0 && basis_prob_x < 1.0)) {
    throw ConfigError("session: basis_prob_x must be in (0, 1)");
  }
  if (!(rep_rate_hz > 0.0)) {
    throw ConfigError("session: rep_rate_hz must be > 0");
  }
  std::set<std::uint32_t> seeds;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    pairs[p].channel.validate();
    pairs[p].schedule.validate();
    const std::uint32_t seed =
        pairs[p].prbs_seed != 0
            ? pairs[p].prbs_seed
            : pair_streams(master_seed, static_cast<std::uint32_t>(p))
                  .default_prbs_seed;
    if (!seeds.insert(seed).second) {
      throw ConfigError("session: PRBS seeds must be distinct per core pair");
    }
  }
}

namespace {

struct PairEngine {
  PairStreams streams;
  Prbs prbs;
  std::uint32_t basis_threshold;  // 16-bit threshold for the X basis

  // Per-detector no-click probabilities indexed by
  // (class * 8 + combo) * 2 + detector; includes the dark-count factor.
  std::array<double, 48> noclick;
  // Leak-in survival factor contributed by one foreign pulse of a given
  // class; applied once per foreign pair per pulse.
  std::array<double, 3> leak_in;

  DecoyStatistics stats;
  std::array<SiftedBatch, 3> batches;

  // Block scratch (structure-of-arrays for the kernels).
  std::vector<std::uint8_t> cls, alice_bit, alice_basis, bob_basis, click0, click1;
  std::vector<std::int32_t> idx0, idx1;
  std::vector<double> u_class, u_bob, u0, u1, xt;

  PairEngine(const PairSetup& setup, const PairStreams& st, double basis_prob_x)
      : streams(st),
        prbs(Prbs::prbs31(setup.prbs_seed != 0 ? setup.prbs_seed
                                               : st.default_prbs_seed)) {
    const double t = std::round(basis_prob_x * 65536.0);
    basis_threshold = static_cast<std::uint32_t>(
        std::clamp(t, 1.0, 65535.0));

    const ChannelParams& ch = setup.channel;
    const double eta = total_transmittance(ch);
    const double leak = ch.crosstalk_fraction();
    const double no_dark = 1.0 - ch.dark_count_prob;

    for (int c = 0; c < 3; ++c) {
      const double mu = setup.schedule.mu_of(static_cast<IntensityClass>(c));
      for (int ab = 0; ab < 2; ++ab) {
        for (int bit = 0; bit < 2; ++bit) {
          const CorePairState state =
              prepare_state(bit, static_cast<Basis>(ab));
          for (int bb = 0; bb < 2; ++bb) {
            const auto born =
                measurement_probabilities(state, static_cast<Basis>(bb));
            const double p0 =
                born[0] * (1.0 - ch.e_det) + born[1] * ch.e_det;
            const int combo = ab * 4 + bit * 2 + bb;
            const double rate = eta * (1.0 - leak) * mu;
            noclick[(c * 8 + combo) * 2 + 0] = no_dark * std::exp(-rate * p0);
            noclick[(c * 8 + combo) * 2 + 1] =
                no_dark * std::exp(-rate * (1.0 - p0));
          }
        }
      }
    }
    // Leak-in rates are split evenly over the two detectors; filled in by
    // the session once the pair count is known.
    leak_in = {1.0, 1.0, 1.0};
  }

  void resize(std::size_t n) {
    cls.resize(n);
    alice_bit.resize(n);
    alice_basis.resize(n);
    bob_basis.resize(n);
    click0.resize(n);
    click1.resize(n);
    idx0.resize(n);
    idx1.resize(n);
    u_class.resize(n);
    u_bob.resize(n);
    u0.resize(n);
    u1.resize(n);
    xt.resize(n);
  }
};

}  // namespace

std::vector<PairSessionResult> run_session(const SessionConfig& config,
                                           const PulseSink* sink) {
  config.validate();
  const std::size_t n_pairs = config.pairs.size();
  const auto& kernel = kernels::active();

  std::vector<PairEngine> engines;
  engines.reserve(n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    engines.emplace_back(config.pairs[p],
                         pair_streams(config.master_seed,
                                      static_cast<std::uint32_t>(p)),
                         config.basis_prob_x);
  }

  // Leak-in factors: pair j receives eta_j * c_j * mu_k / (2 * (P - 1))
  // per detector from each foreign pair k, i.e. the foreign photon lands on
  // a uniformly random detector outside its own pair.
  if (n_pairs > 1) {
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const ChannelParams& ch = config.pairs[p].channel;
      const double eta = total_transmittance(ch);
      const double leak = ch.crosstalk_fraction();
      const double share = 1.0 / (2.0 * static_cast<double>(n_pairs - 1));
      for (int c = 0; c < 3; ++c) {
        const double mu =
            config.pairs[p].schedule.mu_of(static_cast<IntensityClass>(c));
        engines[p].leak_in[c] = std::exp(-eta * leak * mu * share);
      }
    }
  }

  for (std::size_t block = 0; block < config.n_pulses; block += kBlock) {
    const std::size_t m = std::min<std::size_t>(kBlock, config.n_pulses - block);
    for (auto& e : engines) e.resize(m);

    // Intensity classes first: every pair's class row is needed for the
    // crosstalk factors of every other pair.
    for (std::size_t p = 0; p < n_pairs; ++p) {
      PairEngine& e = engines[p];
      const IntensitySchedule& sched = config.pairs[p].schedule;
      kernel.fill_uniform(e.streams.class_key, block, m, e.u_class.data());
      const double t_signal = sched.p_signal;
      const double t_decoy = sched.p_signal + sched.p_decoy;
      for (std::size_t i = 0; i < m; ++i) {
        e.cls[i] = e.u_class[i] < t_signal ? 0u : (e.u_class[i] < t_decoy ? 1u : 2u);
      }
    }

    for (std::size_t p = 0; p < n_pairs; ++p) {
      PairEngine& e = engines[p];

      for (std::size_t i = 0; i < m; ++i) {
        e.alice_bit[i] = static_cast<std::uint8_t>(e.prbs.next());
        const std::uint32_t basis_word = e.prbs.next_bits(16);
        e.alice_basis[i] = basis_word < e.basis_threshold ? 0u : 1u;
      }

      kernel.fill_uniform(e.streams.bob_basis_key, block, m, e.u_bob.data());
      for (std::size_t i = 0; i < m; ++i) {
        e.bob_basis[i] = e.u_bob[i] < config.basis_prob_x ? 0u : 1u;
      }

      for (std::size_t i = 0; i < m; ++i) {
        const int combo = combo_index(static_cast<Basis>(e.alice_basis[i]),
                                      e.alice_bit[i],
                                      static_cast<Basis>(e.bob_basis[i]));
        const int base = (e.cls[i] * 8 + combo) * 2;
        e.idx0[i] = base;
        e.idx1[i] = base + 1;
      }

      if (n_pairs > 1) {
        for (std::size_t i = 0; i < m; ++i) {
          double factor = 1.0;
          for (std::size_t k = 0; k < n_pairs; ++k) {
            if (k == p) continue;
            factor *= e.leak_in[engines[k].cls[i]];
          }
          e.xt[i] = factor;
        }
      } else {
        std::fill(e.xt.begin(), e.xt.end(), 1.0);
      }

      kernel.fill_uniform(e.streams.click0_key, block, m, e.u0.data());
      kernel.fill_uniform(e.streams.click1_key, block, m, e.u1.data());
      kernel.sample_clicks(m, e.idx0.data(), e.idx1.data(), e.xt.data(),
                           e.u0.data(), e.u1.data(), e.noclick.data(),
                           e.click0.data(), e.click1.data());

      for (std::size_t i = 0; i < m; ++i) {
        const PulseRecord pulse{block + i, static_cast<std::uint32_t>(p),
                                static_cast<IntensityClass>(e.cls[i]),
                                static_cast<Basis>(e.alice_basis[i]),
                                e.alice_bit[i]};
        const DetectionRecord detection{e.click0[i] != 0, e.click1[i] != 0,
                                        static_cast<Basis>(e.bob_basis[i]),
                                        block + i};
        const int bob_bit = sift_one(pulse, detection, e.streams.resolve_key,
                                     e.stats, e.batches);
        if (sink != nullptr) (*sink)(LoggedPulse{pulse, detection, bob_bit});
      }
    }
  }

  std::vector<PairSessionResult> results;
  results.reserve(n_pairs);
  for (auto& e : engines) {
    e.stats.validate();
    results.push_back(PairSessionResult{e.stats, std::move(e.batches)});
  }
  return results;
}

}  // namespace sdmqkd
