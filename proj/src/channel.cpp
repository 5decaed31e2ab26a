#include "sdmqkd/channel.hpp"

#include <cmath>
#include <sstream>

#include "sdmqkd/errors.hpp"

namespace sdmqkd {

namespace {

void check(bool ok, const char* field, const char* requirement) {
  if (!ok) {
    std::ostringstream msg;
    msg << "channel parameter '" << field << "' " << requirement;
    throw ConfigError(msg.str());
  }
}

}  // namespace

void ChannelParams::validate() const {
  check(alice_loss_db >= 0.0, "alice_loss_db", "must be >= 0 dB");
  check(fiber_alpha_db_per_km >= 0.0, "fiber_alpha_db_per_km", "must be >= 0 dB/km");
  check(fiber_length_km >= 0.0, "fiber_length_km", "must be >= 0 km");
  check(bob_loss_db >= 0.0, "bob_loss_db", "must be >= 0 dB");
  check(crosstalk_db <= 0.0, "crosstalk_db", "must be <= 0 dB");
  check(det_efficiency > 0.0 && det_efficiency <= 1.0, "det_efficiency",
        "must be in (0, 1]");
  check(dark_count_prob >= 0.0 && dark_count_prob < 1.0, "dark_count_prob",
        "must be in [0, 1)");
  check(e_det >= 0.0 && e_det <= 0.5, "e_det", "must be in [0, 0.5]");
}

double ChannelParams::crosstalk_fraction() const {
  if (std::isinf(crosstalk_db)) return 0.0;
  return std::pow(10.0, crosstalk_db / 10.0);
}

double total_transmittance(const ChannelParams& params) {
  const double loss_db = params.alice_loss_db +
                         params.fiber_alpha_db_per_km * params.fiber_length_km +
                         params.bob_loss_db;
  return std::pow(10.0, -loss_db / 10.0) * params.det_efficiency;
}

double vacuum_yield(const ChannelParams& params) {
  const double no_dark = 1.0 - params.dark_count_prob;
  return 1.0 - no_dark * no_dark;
}

double analytic_gain(double mu, const ChannelParams& params) {
  if (mu < 0.0) throw ConfigError("analytic_gain: mu must be >= 0");
  const double y0 = vacuum_yield(params);
  const double signal = 1.0 - std::exp(-total_transmittance(params) * mu);
  return y0 + (1.0 - y0) * signal;
}

double analytic_qber(double mu, const ChannelParams& params) {
  const double gain = analytic_gain(mu, params);
  if (gain <= 0.0) {
    throw AnalysisError("analytic_qber: gain is zero, error rate undefined");
  }
  const double signal = 1.0 - std::exp(-total_transmittance(params) * mu);
  // The standard numerator counts dark and photon errors additively, which
  // can overshoot 1/2 marginally when e_det is maximal; random assignment
  // caps the physical error fraction at 1/2.
  return std::min(0.5,
                  (0.5 * vacuum_yield(params) + params.e_det * signal) / gain);
}

int poisson_sample(double mean, SequentialRng& rng) {
  if (mean < 0.0) throw ConfigError("poisson_sample: mean must be >= 0");
  if (mean == 0.0) return 0;
  const double threshold = std::exp(-mean);
  int count = -1;
  double product = 1.0;
  do {
    product *= rng.uniform();
    ++count;
  } while (product > threshold);
  return count;
}

DetectionRecord transmit_pulse(const CorePairState& state, double mean_photons,
                               const ChannelParams& params, SequentialRng& rng,
                               Basis measure_basis, std::uint64_t pulse_index) {
  if (mean_photons < 0.0) {
    throw ConfigError("transmit_pulse: mean_photons must be >= 0");
  }

  const double eta = total_transmittance(params);
  const double leak = params.crosstalk_fraction();
  const auto born = measurement_probabilities(state, measure_basis);
  // Misalignment flips the outcome with probability e_det.
  const double p0 = born[0] * (1.0 - params.e_det) + born[1] * params.e_det;

  DetectionRecord record;
  record.basis = measure_basis;
  record.pulse_index = pulse_index;

  const int photons = poisson_sample(mean_photons, rng);
  for (int k = 0; k < photons; ++k) {
    if (rng.uniform() >= eta) continue;       // lost in transmission
    if (rng.uniform() < leak) continue;       // coupled into a foreign core
    if (rng.uniform() < p0) {
      record.clicked_0 = true;
    } else {
      record.clicked_1 = true;
    }
  }

  if (rng.uniform() < params.dark_count_prob) record.clicked_0 = true;
  if (rng.uniform() < params.dark_count_prob) record.clicked_1 = true;
  return record;
}

}  // namespace sdmqkd
