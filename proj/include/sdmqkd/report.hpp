#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sdmqkd/analysis.hpp"
#include "sdmqkd/config.hpp"
#include "sdmqkd/multiplex.hpp"
#include "sdmqkd/protocol.hpp"

// Machine-readable artifacts. JSON for nested reports, CSV for sweeps and
// flat summaries; every artifact embeds the fully-resolved configuration
// and a format_version field. All serialization is deterministic, so the
// same configuration and seed always produce byte-identical files.

namespace sdmqkd {

inline constexpr int kReportFormatVersion = 1;

// Per-pair statistics plus decoy bounds and key rate, shared by the
// simulate and analyze paths so a re-analysis of a session log reproduces
// the original report exactly.
nlohmann::json build_key_rate_report(const RunConfig& config,
                                     const std::vector<DecoyStatistics>& stats);

nlohmann::json build_tomography_report(
    const RunConfig& config, const std::vector<TomographyResult>& results);

nlohmann::json sweep_to_json(const RunConfig& config, const SweepResult& sweep);

std::string sweep_to_csv(const SweepResult& sweep);

// Flat per-pair summary of a key-rate report.
std::string key_rate_report_to_csv(const nlohmann::json& report);

// Matrix rows of a tomography report, one line per prepared state.
std::string tomography_report_to_csv(const nlohmann::json& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sdmqkd
