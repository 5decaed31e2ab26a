// sdmqkd: batch front end for the SDM-QKD simulator.
//
//   sdmqkd simulate  --config c.cfg --out report.json [--seed N] [--format json|csv]
//   sdmqkd analyze   --config c.cfg --out report.json [--seed N] [--format json|csv]
//   sdmqkd tomography --config c.cfg --out report.json [--seed N]
//   sdmqkd compare   --config c.cfg --out sweep.csv   [--format csv|json]
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 analysis
// failure (e.g. the decoy bounds cannot certify a positive single-photon
// yield). Failures also emit a JSON error record on stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdmqkd/analysis.hpp"
#include "sdmqkd/config.hpp"
#include "sdmqkd/errors.hpp"
#include "sdmqkd/kernels.hpp"
#include "sdmqkd/pulse_log.hpp"
#include "sdmqkd/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAnalysis = 4;

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string format;  // empty: per-subcommand default
};

sdmqkd::OutputFormat resolve_format(const CliOptions& options,
                                    sdmqkd::OutputFormat fallback) {
  if (options.format.empty()) return fallback;
  if (options.format == "json") return sdmqkd::OutputFormat::Json;
  if (options.format == "csv") return sdmqkd::OutputFormat::Csv;
  throw sdmqkd::ConfigError("--format must be json or csv");
}

void emit_error(const char* type, const std::string& message) {
  nlohmann::json record;
  record["error"] = {{"type", type}, {"message", message}};
  std::cerr << record.dump() << "\n";
}

void write_report(const nlohmann::json& report, const std::string& path,
                  sdmqkd::OutputFormat format) {
  if (format == sdmqkd::OutputFormat::Json) {
    sdmqkd::write_text_file(path, report.dump(2) + "\n");
  } else {
    sdmqkd::write_text_file(path, sdmqkd::key_rate_report_to_csv(report));
  }
}

bool report_has_analysis_failure(const nlohmann::json& report) {
  for (const auto& entry : report.at("pairs")) {
    if (entry.at("key_rate").at("insufficient_statistics").get<bool>()) {
      return true;
    }
  }
  return false;
}

int run_simulate(const CliOptions& options) {
  using namespace sdmqkd;
  RunConfig config =
      parse_config_file(options.config_path, Subcommand::Simulate, options.seed);

  std::vector<PairSessionResult> results;
  if (!config.pulse_log_path.empty()) {
    PulseLogHeader header;
    header.n_core_pairs = static_cast<std::uint32_t>(config.session.pairs.size());
    header.master_seed = config.session.master_seed;
    header.config_json = config.echo.dump();
    PulseLogWriter writer(config.pulse_log_path, header);
    const PulseSink sink = [&writer](const LoggedPulse& record) {
      writer.write(record);
    };
    results = run_session(config.session, &sink);
    writer.close();
  } else {
    results = run_session(config.session);
  }

  std::vector<DecoyStatistics> stats;
  stats.reserve(results.size());
  for (const auto& result : results) stats.push_back(result.stats);

  const nlohmann::json report = build_key_rate_report(config, stats);
  write_report(report, options.out_path,
               resolve_format(options, OutputFormat::Json));
  return kExitOk;
}

int run_analyze(const CliOptions& options) {
  using namespace sdmqkd;
  RunConfig config =
      parse_config_file(options.config_path, Subcommand::Analyze, options.seed);

  std::vector<DecoyStatistics> stats(config.session.pairs.size());
  const PulseLogHeader header = read_pulse_log(
      config.pulse_log_path, [&stats](const LoggedPulse& record) {
        if (record.pulse.core_pair >= stats.size()) {
          throw IoError("pulse log references core pair " +
                        std::to_string(record.pulse.core_pair) +
                        " beyond the configured session");
        }
        ClassCounts& counts = stats[record.pulse.core_pair][record.pulse.cls];
        counts.sent += 1;
        const bool clicked =
            record.detection.clicked_0 || record.detection.clicked_1;
        if (!clicked) return;
        counts.clicked += 1;
        if (record.pulse.basis != record.detection.basis) return;
        counts.sifted += 1;
        if (static_cast<int>(record.pulse.bit) != record.bob_bit) {
          counts.errors += 1;
        }
      });
  if (header.n_core_pairs != config.session.pairs.size()) {
    throw ConfigError("pulse log has " + std::to_string(header.n_core_pairs) +
                      " core pairs but the session configures " +
                      std::to_string(config.session.pairs.size()));
  }
  for (const auto& s : stats) s.validate();

  const nlohmann::json report = build_key_rate_report(config, stats);
  write_report(report, options.out_path,
               resolve_format(options, OutputFormat::Json));
  if (report_has_analysis_failure(report)) {
    emit_error("analysis",
               "decoy bounds could not certify a positive single-photon yield");
    return kExitAnalysis;
  }
  return kExitOk;
}

int run_tomography(const CliOptions& options) {
  using namespace sdmqkd;
  RunConfig config = parse_config_file(options.config_path,
                                       Subcommand::Tomography, options.seed);

  std::vector<TomographyResult> results;
  for (std::size_t p = 0; p < config.session.pairs.size(); ++p) {
    const PairSetup& setup = config.session.pairs[p];
    TomographyConfig scan;
    scan.pulses_per_state = config.tomography_pulses_per_state;
    scan.mean_photons = setup.schedule.signal_mu;
    scan.basis_prob_x = config.session.basis_prob_x;
    scan.min_cell_counts = config.tomography_min_block_clicks;
    scan.seed = kernels::derive_key(config.session.master_seed, 1000 + p);
    results.push_back(run_tomography(scan, setup.channel));
  }

  const nlohmann::json report = build_tomography_report(config, results);
  if (resolve_format(options, OutputFormat::Json) == OutputFormat::Json) {
    write_text_file(options.out_path, report.dump(2) + "\n");
  } else {
    write_text_file(options.out_path, tomography_report_to_csv(report));
  }
  return kExitOk;
}

int run_compare(const CliOptions& options) {
  using namespace sdmqkd;
  RunConfig config =
      parse_config_file(options.config_path, Subcommand::Compare, options.seed);

  const SweepResult sweep =
      compare_sweep(config.schemes, config.sweep, config.noise_floor);
  for (const std::string& skipped : sweep.skipped) {
    std::cerr << "skipped: " << skipped << "\n";
  }

  if (resolve_format(options, OutputFormat::Csv) == OutputFormat::Csv) {
    write_text_file(options.out_path, sweep_to_csv(sweep));
  } else {
    write_text_file(options.out_path, sweep_to_json(config, sweep).dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-key decoy-state BB84 simulator over multicore fiber"};
  app.require_subcommand(1);

  CliOptions options;
  const auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "configuration file")
        ->required();
    sub->add_option("--out", options.out_path, "output artifact path")
        ->required();
    sub->add_option("--seed", options.seed, "master seed override");
    sub->add_option("--format", options.format, "json or csv");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run a decoy-state session");
  CLI::App* analyze =
      app.add_subcommand("analyze", "recompute a key-rate report from a pulse log");
  CLI::App* tomography =
      app.add_subcommand("tomography", "MUB scan with classical fidelity");
  CLI::App* compare =
      app.add_subcommand("compare", "closed-form multiplexing-scheme sweep");
  for (CLI::App* sub : {simulate, analyze, tomography, compare}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(options);
    if (analyze->parsed()) return run_analyze(options);
    if (tomography->parsed()) return run_tomography(options);
    if (compare->parsed()) return run_compare(options);
  } catch (const sdmqkd::ConfigError& err) {
    emit_error("config", err.what());
    return kExitConfig;
  } catch (const sdmqkd::IoError& err) {
    emit_error("io", err.what());
    return kExitIo;
  } catch (const sdmqkd::AnalysisError& err) {
    emit_error("analysis", err.what());
    return kExitAnalysis;
  } catch (const std::exception& err) {
    emit_error("internal", err.what());
    return 1;
  }
  return kExitOk;
}
