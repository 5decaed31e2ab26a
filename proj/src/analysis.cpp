#include "sdmqkd/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "sdmqkd/errors.hpp"
#include "sdmqkd/kernels.hpp"

namespace sdmqkd {

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("binary_entropy: p must be in [0, 1]");
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double mutual_information(const std::array<std::array<double, 2>, 2>& joint) {
  double sum = 0.0;
  for (const auto& row : joint) {
    for (double cell : row) {
      if (cell < 0.0) {
        throw std::invalid_argument("mutual_information: negative entry");
      }
      sum += cell;
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("mutual_information: table must sum to 1");
  }

  const std::array<double, 2> px = {joint[0][0] + joint[0][1],
                                    joint[1][0] + joint[1][1]};
  const std::array<double, 2> py = {joint[0][0] + joint[1][0],
                                    joint[0][1] + joint[1][1]};
  double info = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double pxy = joint[x][y];
      if (pxy > 0.0) info += pxy * std::log2(pxy / (px[x] * py[y]));
    }
  }
  return info;
}

DecoyBoundsResult decoy_bounds(const DecoyStatistics& stats,
                               const IntensitySchedule& schedule) {
  const double u = schedule.signal_mu;
  const double v = schedule.decoy_mu;
  if (v <= 0.0) {
    throw AnalysisError("decoy_bounds: decoy intensity must be positive");
  }
  if (u - v <= 1e-9 * std::max(1.0, u)) {
    throw AnalysisError("decoy_bounds: schedule is degenerate (u ~ v)");
  }

  DecoyBoundsResult result;
  if (stats[IntensityClass::Signal].sent == 0 ||
      stats[IntensityClass::Decoy].sent == 0) {
    result.insufficient_statistics = true;
    return result;
  }

  const double gain_u = stats.gain(IntensityClass::Signal);
  const double gain_v = stats.gain(IntensityClass::Decoy);
  const double qber_v = stats.qber(IntensityClass::Decoy);
  const double y0 = stats.measured_vacuum_yield();

  const double y1_raw =
      u / (u * v - v * v) *
      (gain_v * std::exp(v) - gain_u * std::exp(u) * (v * v) / (u * u) -
       (u * u - v * v) / (u * u) * y0);

  if (y1_raw <= 0.0) {
    result.y1_lower = 0.0;
    result.e1_upper = 0.5;
    result.clamped_y1 = y1_raw < 0.0;
    result.clamped_e1 = true;
    result.insufficient_statistics = true;
    return result;
  }
  result.y1_lower = y1_raw;
  if (y1_raw > 1.0) {
    result.y1_lower = 1.0;
    result.clamped_y1 = true;
  }

  // e0 = 1/2: dark counts land on a random detector.
  const double e1_raw =
      (qber_v * gain_v * std::exp(v) - 0.5 * y0) / (result.y1_lower * v);
  result.e1_upper = e1_raw;
  if (e1_raw < 0.0) {
    result.e1_upper = 0.0;
    result.clamped_e1 = true;
  } else if (e1_raw > 0.5) {
    result.e1_upper = 0.5;
    result.clamped_e1 = true;
  }
  return result;
}

KeyRateReport secret_key_rate(const DecoyStatistics& stats,
                              const DecoyBoundsResult& bounds,
                              const IntensitySchedule& schedule, double f_ec,
                              double rep_rate_hz) {
  if (f_ec < 1.0) {
    throw ConfigError("secret_key_rate: f_ec must be >= 1");
  }

  KeyRateReport report;
  report.y1_lower = bounds.y1_lower;
  report.e1_upper = bounds.e1_upper;
  report.clamped = bounds.clamped_y1 || bounds.clamped_e1;
  report.insufficient_statistics = bounds.insufficient_statistics;
  report.f_ec = f_ec;

  const double u = schedule.signal_mu;
  const double gain_u = stats.gain(IntensityClass::Signal);
  const double qber_u = stats.qber(IntensityClass::Signal);

  report.qber = qber_u;
  report.attack_limit_ok = qber_u < kCoherentAttackQberLimit;
  report.q1_lower = bounds.y1_lower * u * std::exp(-u);

  // The 1/2 prefactor is the basis-sifting probability.
  report.rate_per_pulse =
      0.5 * (-gain_u * f_ec * binary_entropy(qber_u) +
             report.q1_lower * (1.0 - binary_entropy(bounds.e1_upper)));
  report.rate_per_second = report.rate_per_pulse * rep_rate_hz;
  report.extractable_rate_per_second = std::max(0.0, report.rate_per_second);
  report.secure_key =
      report.rate_per_pulse > 0.0 && !bounds.insufficient_statistics;

  report.info_rate_per_second =
      gain_u * (1.0 - binary_entropy(qber_u)) * rep_rate_hz;
  return report;
}

double classical_fidelity(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("classical_fidelity: length mismatch");
  }
  double sum_p = 0.0;
  double sum_q = 0.0;
  double overlap = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw std::invalid_argument("classical_fidelity: negative probability");
    }
    sum_p += p[i];
    sum_q += q[i];
    overlap += std::sqrt(p[i] * q[i]);
  }
  if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9) {
    throw std::invalid_argument("classical_fidelity: vectors must sum to 1");
  }
  return overlap;
}

TomographyMatrix ideal_tomography_matrix() {
  TomographyMatrix m{};
  for (int row = 0; row < 4; ++row) {
    const int basis = row / 2;  // 0: X rows, 1: Z rows
    const int bit = row % 2;
    for (int col = 0; col < 4; ++col) {
      const int col_basis = col / 2;
      const int outcome = col % 2;
      m[row][col] = col_basis == basis ? (outcome == bit ? 1.0 : 0.0) : 0.5;
    }
  }
  return m;
}

TomographyResult run_tomography(const TomographyConfig& config,
                                const ChannelParams& params) {
  params.validate();
  if (config.pulses_per_state == 0) {
    throw ConfigError("tomography: pulses_per_state must be > 0");
  }
  if (!(config.basis_prob_x > 0.0 && config.basis_prob_x < 1.0)) {
    throw ConfigError("tomography: basis_prob_x must be in (0, 1)");
  }

  using kernels::derive_key;
  using kernels::uniform_at;
  const std::uint64_t bob_key = derive_key(config.seed, 1);
  const std::uint64_t click0_key = derive_key(config.seed, 2);
  const std::uint64_t click1_key = derive_key(config.seed, 3);
  const std::uint64_t resolve_key = derive_key(config.seed, 4);

  const double eta = total_transmittance(params);
  const double own_rate =
      eta * (1.0 - params.crosstalk_fraction()) * config.mean_photons;
  const double no_dark = 1.0 - params.dark_count_prob;

  // counts[row][basis][outcome]; the third outcome slot takes double clicks
  // before resolution so the resolved bit can be assigned uniformly.
  std::uint64_t counts[4][2][2] = {};

  std::uint64_t counter = 0;
  for (int row = 0; row < 4; ++row) {
    const Basis prep_basis = row < 2 ? Basis::X : Basis::Z;
    const int bit = row % 2;
    const CorePairState state = prepare_state(bit, prep_basis);

    // Per-detector no-click probabilities for both of Bob's settings.
    double noclick[2][2];
    for (int bb = 0; bb < 2; ++bb) {
      const auto born = measurement_probabilities(state, static_cast<Basis>(bb));
      const double p0 = born[0] * (1.0 - params.e_det) + born[1] * params.e_det;
      noclick[bb][0] = no_dark * std::exp(-own_rate * p0);
      noclick[bb][1] = no_dark * std::exp(-own_rate * (1.0 - p0));
    }

    for (std::uint64_t i = 0; i < config.pulses_per_state; ++i, ++counter) {
      const int bb =
          uniform_at(bob_key, counter) < config.basis_prob_x ? 0 : 1;
      const bool c0 = uniform_at(click0_key, counter) >= noclick[bb][0];
      const bool c1 = uniform_at(click1_key, counter) >= noclick[bb][1];
      if (!c0 && !c1) continue;
      int outcome;
      if (c0 && c1) {
        outcome = uniform_at(resolve_key, counter) < 0.5 ? 0 : 1;
      } else {
        outcome = c0 ? 0 : 1;
      }
      counts[row][bb][outcome] += 1;
    }
  }

  TomographyResult result;
  result.min_block_clicks = UINT64_MAX;
  const TomographyMatrix ideal = ideal_tomography_matrix();
  double fidelity_sum = 0.0;
  double bhattacharyya_sum = 0.0;

  for (int row = 0; row < 4; ++row) {
    for (int bb = 0; bb < 2; ++bb) {
      const std::uint64_t total = counts[row][bb][0] + counts[row][bb][1];
      result.min_block_clicks = std::min(result.min_block_clicks, total);
      if (total < config.min_cell_counts) {
        throw AnalysisError(
            "tomography: insufficient clicks in a (state, basis) block");
      }
      const std::array<double, 2> measured = {
          static_cast<double>(counts[row][bb][0]) / static_cast<double>(total),
          static_cast<double>(counts[row][bb][1]) / static_cast<double>(total)};
      result.matrix[row][bb * 2 + 0] = measured[0];
      result.matrix[row][bb * 2 + 1] = measured[1];

      const std::array<double, 2> ideal_block = {ideal[row][bb * 2 + 0],
                                                 ideal[row][bb * 2 + 1]};
      const double overlap = classical_fidelity(measured, ideal_block);
      bhattacharyya_sum += overlap;
      if ((row < 2 ? 0 : 1) == bb) fidelity_sum += overlap * overlap;
    }
  }

  result.fidelity = fidelity_sum / 4.0;
  result.bhattacharyya_mean = bhattacharyya_sum / 8.0;
  return result;
}

}  // namespace sdmqkd
