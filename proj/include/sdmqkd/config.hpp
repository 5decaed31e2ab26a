#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdmqkd/analysis.hpp"
#include "sdmqkd/multiplex.hpp"
#include "sdmqkd/protocol.hpp"

// Run configuration: one flat key-value file with sections per module, so
// replication setups can live in version control. Parsing is strict:
// unknown sections or keys are errors, all physical parameters are
// range-checked, and every applied default is echoed into the output
// artifacts to keep them self-describing.

namespace sdmqkd {

enum class Subcommand { Simulate, Analyze, Tomography, Compare };

const char* subcommand_name(Subcommand sub);

enum class OutputFormat { Json, Csv };

struct RunConfig {
  Subcommand subcommand = Subcommand::Simulate;

  SessionConfig session;   // per-pair channel, schedule and seeds resolved
  double f_ec = kDefaultErrorCorrectionFactor;

  // Tomography settings (per-pair seeds are derived from the master seed).
  std::uint64_t tomography_pulses_per_state = 200000;
  std::uint64_t tomography_min_block_clicks = 100;

  // Scheme comparison.
  std::vector<SchemeParams> schemes;
  SweepSpec sweep;
  NoiseFloor noise_floor;

  std::string pulse_log_path;  // empty: simulate writes no log
  OutputFormat format = OutputFormat::Json;

  // Fully-resolved configuration (defaults applied) for artifact embedding,
  // plus the list of keys whose values came from defaults.
  nlohmann::json echo;
};

// Parses configuration text. Errors carry 1-based line numbers and the
// offending section.key. `seed_override` replaces session.master_seed
// before seed derivation (the CLI --seed flag).
RunConfig parse_config_text(const std::string& text, Subcommand subcommand,
                            std::optional<std::uint64_t> seed_override = {});

// File variant; throws IoError when the file cannot be read.
RunConfig parse_config_file(const std::string& path, Subcommand subcommand,
                            std::optional<std::uint64_t> seed_override = {});

}  // namespace sdmqkd
