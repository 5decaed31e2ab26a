#include <doctest.h>

#include <string>

#include "sdmqkd/config.hpp"
#include "sdmqkd/errors.hpp"

using namespace sdmqkd;

namespace {

const char* kMinimal = R"(
[schedule]
u = 0.5

[session]
n_pulses = 1000
)";

// Link parameters as quoted for the fabricated chips: 15 dB transmitter,
// 8 dB receiver, -30 dB inter-core coupling, 5 kHz pulses.
const char* kChipLink = R"(
[channel]
alice_loss_db = 15
bob_loss_db = 8
crosstalk_db = -30
det_efficiency = 0.1
dark_count_prob = 2e-8
e_det = 0.059, 0.047

[session]
n_pulses = 100000
n_core_pairs = 2
rep_rate_hz = 5000

[schedule]
u = 0.5, 0.45
)";

}  // namespace

TEST_CASE("a minimal config is fully defaulted") {
  const RunConfig config = parse_config_text(kMinimal, Subcommand::Simulate);
  REQUIRE(config.session.pairs.size() == 1);
  const PairSetup& pair = config.session.pairs[0];

  CHECK(pair.schedule.signal_mu == 0.5);
  CHECK(pair.schedule.decoy_mu == 0.25);  // v = u/2
  CHECK(pair.schedule.p_signal == 0.7);
  CHECK(pair.schedule.p_decoy == 0.2);
  CHECK(pair.schedule.p_vacuum == 0.1);
  CHECK(config.f_ec == 1.22);
  CHECK(config.session.basis_prob_x == 0.5);
  CHECK(config.session.rep_rate_hz == 5000.0);
  CHECK(pair.channel.det_efficiency == 1.0);
  CHECK(config.session.n_pulses == 1000);

  // Applied defaults are part of the echo.
  const auto& defaults = config.echo.at("defaults_applied");
  const auto has = [&defaults](const std::string& name) {
    for (const auto& d : defaults) {
      if (d.get<std::string>() == name) return true;
    }
    return false;
  };
  CHECK(has("schedule.v"));
  CHECK(has("schedule.p_u"));
  CHECK(has("analysis.f_ec"));
  CHECK(has("session.basis_prob_x"));
  CHECK(config.echo.at("schedule").at("v")[0].get<double>() == 0.25);
}

TEST_CASE("unknown keys and sections are rejected with line numbers") {
  CHECK_THROWS_WITH_AS(
      parse_config_text("[channel]\nalice_loss = 1\n", Subcommand::Compare),
      doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text("[channel]\nalice_loss = 1\n", Subcommand::Compare),
      doctest::Contains("channel.alice_loss"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[quantum]\nx = 1\n", Subcommand::Compare),
                       doctest::Contains("unknown section"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text("[channel]\ndark_count_prob = 1\ndark_count_prob = 2\n",
                        Subcommand::Compare),
      doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("x = 1\n", Subcommand::Compare),
                       doctest::Contains("section"), ConfigError);
}

TEST_CASE("range violations name the offending key") {
  const std::string bad = std::string(kMinimal) +
                          "\n[channel]\ndark_count_prob = -1\n";
  CHECK_THROWS_WITH_AS(parse_config_text(bad, Subcommand::Simulate),
                       doctest::Contains("dark_count_prob"), ConfigError);

  const std::string bad_basis =
      std::string(kMinimal) + "\n[session]x\n";
  CHECK_THROWS_AS(parse_config_text(bad_basis, Subcommand::Simulate),
                  ConfigError);
}

TEST_CASE("missing required keys per subcommand") {
  CHECK_THROWS_WITH_AS(
      parse_config_text("[schedule]\nu = 0.5\n", Subcommand::Simulate),
      doctest::Contains("n_pulses"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[session]\nn_pulses = 10\n",
                                         Subcommand::Simulate),
                       doctest::Contains("schedule.u"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(kMinimal, Subcommand::Analyze),
      doctest::Contains("pulse_log"), ConfigError);
  // compare needs neither a session nor a schedule.
  CHECK_NOTHROW(parse_config_text("[compare]\nn_max = 8\n", Subcommand::Compare));
}

TEST_CASE("the chip-link replication settings parse and echo") {
  const RunConfig config = parse_config_text(kChipLink, Subcommand::Simulate);
  REQUIRE(config.session.pairs.size() == 2);
  CHECK(config.session.pairs[0].channel.alice_loss_db == 15.0);
  CHECK(config.session.pairs[0].channel.bob_loss_db == 8.0);
  CHECK(config.session.pairs[0].channel.crosstalk_db == -30.0);
  CHECK(config.session.pairs[0].channel.e_det == 0.059);
  CHECK(config.session.pairs[1].channel.e_det == 0.047);
  CHECK(config.session.pairs[0].schedule.signal_mu == 0.5);
  CHECK(config.session.pairs[1].schedule.signal_mu == 0.45);
  CHECK(config.session.rep_rate_hz == 5000.0);

  CHECK(config.echo.at("channel").at("alice_loss_db").get<double>() == 15.0);
  CHECK(config.echo.at("channel").at("e_det")[1].get<double>() == 0.047);
  CHECK(config.echo.at("session").at("rep_rate_hz").get<double>() == 5000.0);
  // Derived per-pair PRBS seeds are echoed and distinct.
  const auto& seeds = config.echo.at("session").at("prbs_seeds");
  REQUIRE(seeds.size() == 2);
  CHECK(seeds[0].get<std::uint64_t>() != seeds[1].get<std::uint64_t>());
}

TEST_CASE("per-pair lists must match the pair count") {
  const std::string bad = R"(
[session]
n_pulses = 10
n_core_pairs = 2

[schedule]
u = 0.5, 0.45, 0.4
)";
  CHECK_THROWS_WITH_AS(parse_config_text(bad, Subcommand::Simulate),
                       doctest::Contains("schedule.u"), ConfigError);
}

TEST_CASE("seed override replaces the master seed before derivation") {
  const RunConfig base = parse_config_text(kMinimal, Subcommand::Simulate);
  const RunConfig overridden =
      parse_config_text(kMinimal, Subcommand::Simulate, 4242);
  CHECK(base.session.master_seed == 1);
  CHECK(overridden.session.master_seed == 4242);
  CHECK(overridden.echo.at("session").at("master_seed").get<std::uint64_t>() ==
        4242);
  CHECK(base.echo.at("session").at("prbs_seeds") !=
        overridden.echo.at("session").at("prbs_seeds"));
}

TEST_CASE("explicit PRBS seeds are validated") {
  const std::string zero_seed = std::string(kMinimal) +
                                "\n[session]\nprbs_seeds = 0\n";
  CHECK_THROWS_AS(parse_config_text(zero_seed, Subcommand::Simulate),
                  ConfigError);
}

TEST_CASE("crosstalk accepts -inf and defaults to off") {
  const RunConfig config = parse_config_text(kMinimal, Subcommand::Simulate);
  CHECK(std::isinf(config.session.pairs[0].channel.crosstalk_db));
  CHECK(config.echo.at("channel").at("crosstalk_db").get<std::string>() ==
        "-inf");

  const std::string explicit_off =
      std::string(kMinimal) + "\n[channel]\ncrosstalk_db = -inf\n";
  const RunConfig parsed = parse_config_text(explicit_off, Subcommand::Simulate);
  CHECK(parsed.session.pairs[0].channel.crosstalk_fraction() == 0.0);
}

TEST_CASE("compare settings build scheme parameters") {
  const std::string compare_cfg = R"(
[channel]
fiber_alpha_db_per_km = 0.37
bob_loss_db = 8
det_efficiency = 0.1

[compare]
schemes = SDM, HD
n_min = 2
n_max = 8
length_km = 50
)";
  const RunConfig config = parse_config_text(compare_cfg, Subcommand::Compare);
  REQUIRE(config.schemes.size() == 2);
  CHECK(config.schemes[0].scheme == Scheme::SDM);
  CHECK(config.schemes[1].scheme == Scheme::HD);
  CHECK(config.schemes[0].link.fiber_length_km == 50.0);
  CHECK(config.schemes[0].link.receiver_loss_db == 8.0);
  CHECK(config.schemes[0].link.det_efficiency == 0.1);
  CHECK(config.sweep.n_max == 8);

  CHECK_THROWS_AS(
      parse_config_text("[compare]\nschemes = XYZ\n", Subcommand::Compare),
      ConfigError);
}
