#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sdmqkd/analysis.hpp"
#include "sdmqkd/errors.hpp"

using namespace sdmqkd;

namespace {

// Builds integer-count statistics realizing the given gains as closely as
// a large denominator allows.
DecoyStatistics stats_from_gains(double gain_u, double gain_v, double qber_u,
                                 double qber_v, double y0) {
  const std::uint64_t sent = 1000000000ull;
  DecoyStatistics stats;
  const auto fill = [sent](ClassCounts& c, double gain, double qber) {
    c.sent = sent;
    c.clicked = static_cast<std::uint64_t>(std::llround(gain * sent));
    c.sifted = c.clicked / 2;
    c.errors = static_cast<std::uint64_t>(std::llround(qber * double(c.sifted)));
  };
  fill(stats[IntensityClass::Signal], gain_u, qber_u);
  fill(stats[IntensityClass::Decoy], gain_v, qber_v);
  fill(stats[IntensityClass::Vacuum], y0, 0.5);
  return stats;
}

IntensitySchedule schedule_uv(double u, double v) {
  IntensitySchedule s;
  s.signal_mu = u;
  s.decoy_mu = v;
  return s;
}

// Closed-form channel family used as ground truth: yields
// Y_n = Y0 + (1 - Y0)(1 - (1-eta)^n) with misalignment e_det, matching the
// Poissonian gain and error forms exactly.
struct SyntheticChannel {
  double eta;
  double pd;
  double e_det;

  double y0() const { return 1.0 - (1.0 - pd) * (1.0 - pd); }
  double gain(double mu) const {
    return y0() + (1.0 - y0()) * (1.0 - std::exp(-eta * mu));
  }
  double qber(double mu) const {
    return (0.5 * y0() + e_det * (1.0 - std::exp(-eta * mu))) / gain(mu);
  }
  double true_y1() const { return y0() + eta - y0() * eta; }
  double true_e1() const { return (0.5 * y0() + e_det * eta) / true_y1(); }
};

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.11) ==
        doctest::Approx(0.499915958164528).epsilon(1e-12));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);

  // Symmetry and concavity on a grid.
  for (int i = 1; i < 50; ++i) {
    const double p = i / 100.0;
    CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1.0 - p)));
    const double mid = binary_entropy(p);
    const double chord =
        0.5 * (binary_entropy(p - 0.01) + binary_entropy(p + 0.01));
    CHECK(mid >= chord - 1e-12);
  }
}

TEST_CASE("mutual information") {
  // Perfectly correlated uniform bits.
  CHECK(mutual_information({{{0.5, 0.0}, {0.0, 0.5}}}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Independent uniform bits.
  CHECK(mutual_information({{{0.25, 0.25}, {0.25, 0.25}}}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // Binary symmetric channel at the measured error rate.
  const double flip = 0.059;
  const std::array<std::array<double, 2>, 2> bsc = {
      {{0.5 * (1 - flip), 0.5 * flip}, {0.5 * flip, 0.5 * (1 - flip)}}};
  CHECK(mutual_information(bsc) ==
        doctest::Approx(0.6765375641278148).epsilon(1e-12));

  CHECK_THROWS_AS(mutual_information({{{0.5, 0.2}, {0.0, 0.2}}}),
                  std::invalid_argument);
}

TEST_CASE("decoy bounds on an ideal single-photon-dominated channel") {
  // eta = 0.05, no darks, e_det = 0.03, u = 0.5, v = 0.1. True Y1 = eta.
  const SyntheticChannel channel{0.05, 0.0, 0.03};
  const double u = 0.5;
  const double v = 0.1;
  DecoyStatistics stats = stats_from_gains(channel.gain(u), channel.gain(v),
                                           channel.qber(u), channel.qber(v),
                                           channel.y0());
  const DecoyBoundsResult bounds = decoy_bounds(stats, schedule_uv(u, v));
  CHECK_FALSE(bounds.insufficient_statistics);

  // Frozen oracle values (closed-form evaluation of the bound on the
  // exact gains): y1 = 0.0485472..., slack under 5 percent of eta.
  CHECK(bounds.y1_lower == doctest::Approx(0.048547250262).epsilon(1e-4));
  CHECK(bounds.y1_lower <= channel.true_y1() + 1e-12);
  CHECK(bounds.y1_lower >= 0.95 * channel.true_y1());
  CHECK(bounds.e1_upper >= channel.true_e1() - 1e-12);
  CHECK(bounds.e1_upper == doctest::Approx(0.034062050393).epsilon(1e-3));
}

TEST_CASE("decoy bounds boundary: zero numerator is flagged") {
  const double u = 0.5;
  const double v = 0.25;
  const double gain_u = 0.03;
  const double gain_v = 0.012;
  // Vacuum yield chosen so the yield numerator vanishes exactly.
  const double y0 = (gain_v * std::exp(v) - gain_u * std::exp(u) * 0.25) / 0.75;
  DecoyStatistics stats = stats_from_gains(gain_u, gain_v, 0.03, 0.03, y0);
  const DecoyBoundsResult bounds = decoy_bounds(stats, schedule_uv(u, v));
  CHECK(bounds.y1_lower == 0.0);
  CHECK(bounds.e1_upper == 0.5);
  CHECK(bounds.insufficient_statistics);
}

TEST_CASE("decoy bounds with the published gain values") {
  // Q_u = 3.32e-2, Q_v = 1.8e-2 at u = 0.5 with the default v = u/2.
  DecoyStatistics stats = stats_from_gains(3.32e-2, 1.8e-2, 0.059, 0.059, 4e-8);
  const DecoyBoundsResult bounds = decoy_bounds(stats, schedule_uv(0.5, 0.25));
  CHECK_FALSE(bounds.insufficient_statistics);
  CHECK(bounds.y1_lower > 0.0);
  CHECK(bounds.y1_lower == doctest::Approx(0.0754243276).epsilon(1e-4));
}

TEST_CASE("decoy bounds degenerate schedules") {
  DecoyStatistics stats = stats_from_gains(0.03, 0.012, 0.03, 0.03, 0.0);
  CHECK_THROWS_AS(decoy_bounds(stats, schedule_uv(0.5, 0.5 - 1e-12)),
                  AnalysisError);
  CHECK_THROWS_AS(decoy_bounds(stats, schedule_uv(0.5, 0.0)), AnalysisError);
}

TEST_CASE("bound soundness across a synthetic channel grid") {
  for (double eta : {1e-4, 1e-3, 1e-2, 0.1, 0.5}) {
    for (double mu : {0.1, 0.5, 0.9}) {
      for (double pd : {0.0, 1e-6, 1e-5}) {
        for (double e_det : {0.0, 0.05, 0.1}) {
          const SyntheticChannel channel{eta, pd, e_det};
          const double v = mu / 2.0;
          DecoyStatistics stats = stats_from_gains(
              channel.gain(mu), channel.gain(v), channel.qber(mu),
              channel.qber(v), channel.y0());
          const DecoyBoundsResult bounds =
              decoy_bounds(stats, schedule_uv(mu, v));
          CHECK(bounds.y1_lower <= channel.true_y1() + 1e-9);
          CHECK(bounds.e1_upper >= channel.true_e1() - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("secret key rate limits") {
  const double u = 0.5;
  const IntensitySchedule schedule = schedule_uv(u, 0.25);

  SUBCASE("noiseless: R = Q_u / 2") {
    DecoyStatistics stats = stats_from_gains(0.03, 0.015, 0.0, 0.0, 0.0);
    DecoyBoundsResult bounds;
    bounds.y1_lower = 0.03 / (u * std::exp(-u));  // makes Q1 equal Q_u
    bounds.e1_upper = 0.0;
    const KeyRateReport report =
        secret_key_rate(stats, bounds, schedule, 1.22, 5000.0);
    CHECK(report.rate_per_pulse == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(report.secure_key);
    CHECK(report.attack_limit_ok);
  }

  SUBCASE("maximal single-photon error destroys the key") {
    DecoyStatistics stats = stats_from_gains(0.03, 0.015, 0.059, 0.059, 0.0);
    DecoyBoundsResult bounds;
    bounds.y1_lower = 0.05;
    bounds.e1_upper = 0.5;
    const KeyRateReport report =
        secret_key_rate(stats, bounds, schedule, 1.22, 5000.0);
    CHECK(report.rate_per_pulse < 0.0);
    CHECK(report.extractable_rate_per_second == 0.0);
    CHECK_FALSE(report.secure_key);
  }

  SUBCASE("f_ec below 1 is rejected") {
    DecoyStatistics stats = stats_from_gains(0.03, 0.015, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(
        secret_key_rate(stats, DecoyBoundsResult{}, schedule, 0.9, 5000.0),
        ConfigError);
  }
}

TEST_CASE("key rate on the published statistics") {
  // Measured values of key 1 with the default v = u/2 and f = 1.22. The
  // full rate expression lands slightly negative on these inputs, while
  // the information-throughput diagnostic reproduces the quoted order of
  // magnitude (about 113 bit/s at 5 kHz).
  const SyntheticChannel channel{0.06752726, 2e-8, 0.059};
  DecoyStatistics stats =
      stats_from_gains(channel.gain(0.5), channel.gain(0.25),
                       channel.qber(0.5), channel.qber(0.25), channel.y0());
  const DecoyBoundsResult bounds = decoy_bounds(stats, schedule_uv(0.5, 0.25));
  const KeyRateReport report =
      secret_key_rate(stats, bounds, schedule_uv(0.5, 0.25), 1.22, 5000.0);

  CHECK(report.y1_lower == doctest::Approx(0.062482944).epsilon(1e-4));
  CHECK(report.e1_upper == doctest::Approx(0.081186635).epsilon(1e-3));
  CHECK(report.rate_per_second == doctest::Approx(-4.63109).epsilon(1e-2));
  CHECK(report.extractable_rate_per_second == 0.0);
  CHECK_FALSE(report.secure_key);
  CHECK(report.attack_limit_ok);
  CHECK(report.info_rate_per_second == doctest::Approx(112.305).epsilon(1e-3));

  // q1_lower never exceeds the measured signal gain.
  CHECK(report.q1_lower <= stats.gain(IntensityClass::Signal));
}

TEST_CASE("rate is non-increasing in either error rate") {
  const IntensitySchedule schedule = schedule_uv(0.5, 0.25);
  DecoyBoundsResult bounds;
  bounds.y1_lower = 0.06;

  double previous = 1e9;
  for (double qber_u : {0.0, 0.02, 0.05, 0.08, 0.11}) {
    bounds.e1_upper = 0.05;
    DecoyStatistics stats = stats_from_gains(0.0332, 0.0167, qber_u, 0.05, 4e-8);
    const double rate =
        secret_key_rate(stats, bounds, schedule, 1.22, 5000.0).rate_per_pulse;
    CHECK(rate <= previous + 1e-15);
    previous = rate;
  }
  previous = 1e9;
  for (double e1 : {0.0, 0.05, 0.1, 0.2, 0.35, 0.5}) {
    bounds.e1_upper = e1;
    DecoyStatistics stats = stats_from_gains(0.0332, 0.0167, 0.059, 0.05, 4e-8);
    const double rate =
        secret_key_rate(stats, bounds, schedule, 1.22, 5000.0).rate_per_pulse;
    CHECK(rate <= previous + 1e-15);
    previous = rate;
  }
}

TEST_CASE("attack limit predicate is exactly qber < 0.11") {
  const IntensitySchedule schedule = schedule_uv(0.5, 0.25);
  const DecoyBoundsResult bounds;
  for (double qber : {0.0, 0.109, 0.11, 0.111, 0.3}) {
    DecoyStatistics stats = stats_from_gains(0.04, 0.02, qber, qber, 0.0);
    const KeyRateReport report =
        secret_key_rate(stats, bounds, schedule, 1.22, 5000.0);
    CHECK(report.attack_limit_ok ==
          (stats.qber(IntensityClass::Signal) < 0.11));
  }
}

TEST_CASE("classical fidelity") {
  const std::vector<double> p = {0.5, 0.5};
  const std::vector<double> q = {1.0, 0.0};
  const std::vector<double> q_flip = {0.0, 1.0};
  const std::vector<double> one = {1.0};
  const std::vector<double> short_mass = {0.4, 0.4};
  const std::vector<double> negative = {1.5, -0.5};
  CHECK(classical_fidelity(p, p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(classical_fidelity(q, q_flip) == doctest::Approx(0.0));
  CHECK(classical_fidelity(p, q) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(classical_fidelity(p, one), std::invalid_argument);
  CHECK_THROWS_AS(classical_fidelity(short_mass, p), std::invalid_argument);
  CHECK_THROWS_AS(classical_fidelity(negative, p), std::invalid_argument);

  // Bounds and the identity case over random distributions.
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a = {unit(gen), unit(gen), unit(gen), unit(gen)};
    std::vector<double> b = {unit(gen), unit(gen), unit(gen), unit(gen)};
    double sa = 0.0, sb = 0.0;
    for (double x : a) sa += x;
    for (double x : b) sb += x;
    for (double& x : a) x /= sa;
    for (double& x : b) x /= sb;
    const double f = classical_fidelity(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-12);
    CHECK(classical_fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    // F = 1 only for identical distributions.
    double max_gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      max_gap = std::max(max_gap, std::abs(a[i] - b[i]));
    }
    if (max_gap > 1e-6) CHECK(f < 1.0 - 1e-12);
  }
}

TEST_CASE("tomography of a noiseless link is exact") {
  TomographyConfig config;
  config.pulses_per_state = 50000;
  config.mean_photons = 0.5;
  config.seed = 77;

  ChannelParams channel;
  channel.det_efficiency = 0.1;
  const TomographyResult result = run_tomography(config, channel);

  CHECK(result.fidelity == doctest::Approx(1.0).epsilon(1e-12));
  const TomographyMatrix ideal = ideal_tomography_matrix();
  for (int row = 0; row < 4; ++row) {
    const int own_basis = row / 2;
    for (int col = 0; col < 2; ++col) {
      // Within-basis blocks are exactly the identity without noise.
      CHECK(result.matrix[row][own_basis * 2 + col] ==
            ideal[row][own_basis * 2 + col]);
    }
  }
  CHECK(result.min_block_clicks >= 100);
}

TEST_CASE("tomography at the calibrated misalignment") {
  TomographyConfig config;
  config.pulses_per_state = 200000;
  config.mean_photons = 0.5;
  config.seed = 99;

  ChannelParams channel;
  channel.det_efficiency = 0.067528;
  channel.dark_count_prob = 2e-8;
  channel.e_det = 0.059;
  const TomographyResult result = run_tomography(config, channel);
  CHECK(result.fidelity > 0.93);
  CHECK(result.fidelity < 0.97);
}

TEST_CASE("tomography with a depolarized link") {
  TomographyConfig config;
  config.pulses_per_state = 100000;
  config.mean_photons = 0.5;
  config.seed = 5;

  ChannelParams channel;
  channel.det_efficiency = 0.2;
  channel.e_det = 0.5;
  const TomographyResult result = run_tomography(config, channel);
  // Every block is flat: the within-basis squared overlap against the
  // ideal row [1, 0] is 1/2, and the block overlap mean is (sqrt(.5)+1)/2.
  CHECK(result.fidelity == doctest::Approx(0.5).epsilon(0.02));
  CHECK(result.bhattacharyya_mean ==
        doctest::Approx(0.8535533905932737).epsilon(0.01));
}

TEST_CASE("tomography signals insufficient counts") {
  TomographyConfig config;
  config.pulses_per_state = 500;
  config.mean_photons = 0.5;
  config.seed = 1;

  ChannelParams channel;
  channel.det_efficiency = 0.01;  // a few clicks per block at most
  CHECK_THROWS_AS(run_tomography(config, channel), AnalysisError);
}
