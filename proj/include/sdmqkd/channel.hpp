#pragma once

#include <cstdint>
#include <limits>

#include "sdmqkd/kernels.hpp"
#include "sdmqkd/qstate.hpp"

// Photon-level model of one transmitter-fiber-receiver link: Poissonian
// weak coherent pulses, lumped losses, incoherent inter-core crosstalk,
// detector efficiency and dark counts, plus the matching closed-form gain
// and error-rate expressions used by the decoy analysis.

namespace sdmqkd {

struct ChannelParams {
  double alice_loss_db = 0.0;         // transmitter chip insertion loss
  double fiber_alpha_db_per_km = 0.0;
  double fiber_length_km = 0.0;
  double bob_loss_db = 0.0;           // receiver chip insertion loss
  // Inter-core power coupling; -inf disables crosstalk entirely.
  double crosstalk_db = -std::numeric_limits<double>::infinity();
  double det_efficiency = 1.0;        // eta_d in (0, 1]
  double dark_count_prob = 0.0;       // per detector per gate
  double e_det = 0.0;                 // optical misalignment error in [0, 0.5]

  void validate() const;  // throws ConfigError naming the offending field

  // Fraction of a photon's power coupled into foreign cores.
  double crosstalk_fraction() const;
};

// eta_total = 10^(-(alice + alpha*length + bob)/10) * det_efficiency
double total_transmittance(const ChannelParams& params);

// Vacuum yield Y0: probability that at least one of the two detectors
// fires from dark counts alone.
double vacuum_yield(const ChannelParams& params);

// Gain Q_mu = Y0 + (1 - Y0) * (1 - exp(-eta_total * mu)).
double analytic_gain(double mu, const ChannelParams& params);

// E_mu = [Y0/2 + e_det * (1 - exp(-eta_total * mu))] / Q_mu.
// Throws AnalysisError when Q_mu is zero.
double analytic_qber(double mu, const ChannelParams& params);

struct DetectionRecord {
  bool clicked_0 = false;
  bool clicked_1 = false;
  Basis basis = Basis::X;  // the basis Bob measured in
  std::uint64_t pulse_index = 0;
};

// Small sequential generator for the explicit per-photon channel path and
// for callers that need an ad-hoc uniform stream.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kernels::kGolden;
    return kernels::mix64(state_);
  }

  double uniform() { return kernels::to_unit_double(next_u64()); }

 private:
  std::uint64_t state_;
};

// Poisson sample by uniform-product inversion. Suitable for the small
// means of weak coherent pulses.
int poisson_sample(double mean, SequentialRng& rng);

// Reference per-photon channel simulation: draws the photon number, thins
// each photon by the total transmittance, diverts crosstalk leakage out of
// the pair, assigns detector outcomes through the misalignment-flipped
// Born probabilities in Bob's basis, and finally adds dark counts. Leakage
// into this pair from neighbouring cores is a session-level effect and is
// handled by the protocol engine, not here.
DetectionRecord transmit_pulse(const CorePairState& state, double mean_photons,
                               const ChannelParams& params, SequentialRng& rng,
                               Basis measure_basis,
                               std::uint64_t pulse_index = 0);

}  // namespace sdmqkd
