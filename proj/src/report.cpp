#include "sdmqkd/report.hpp"

#include <fstream>
#include <sstream>

#include "sdmqkd/errors.hpp"

namespace sdmqkd {

namespace {

using nlohmann::json;

// Number-to-text through the JSON serializer: shortest round-trip form,
// identical for identical doubles.
std::string number_text(double value) { return json(value).dump(); }

json class_map(const DecoyStatistics& stats,
               std::uint64_t ClassCounts::* member) {
  json out;
  for (int c = 0; c < 3; ++c) {
    out[kClassLabels[c]] = stats.per_class[c].*member;
  }
  return out;
}

json ratio_map(const DecoyStatistics& stats, bool gains) {
  json out;
  for (int c = 0; c < 3; ++c) {
    const auto cls = static_cast<IntensityClass>(c);
    const ClassCounts& counts = stats[cls];
    if (gains) {
      out[kClassLabels[c]] =
          counts.sent == 0 ? json(nullptr) : json(stats.gain(cls));
    } else {
      out[kClassLabels[c]] =
          counts.sifted == 0 ? json(nullptr) : json(stats.qber(cls));
    }
  }
  return out;
}

json statistics_block(const PairSetup& setup, const DecoyStatistics& stats) {
  json block;
  block["sent"] = class_map(stats, &ClassCounts::sent);
  block["clicked"] = class_map(stats, &ClassCounts::clicked);
  block["sifted"] = class_map(stats, &ClassCounts::sifted);
  block["errors"] = class_map(stats, &ClassCounts::errors);
  block["gain"] = ratio_map(stats, true);
  block["qber"] = ratio_map(stats, false);
  block["vacuum_yield"] = stats[IntensityClass::Vacuum].sent == 0
                              ? json(nullptr)
                              : json(stats.measured_vacuum_yield());
  // Model-predicted gains from the configured channel: the transmitter-side
  // expectation to hold against the receiver-side measurement.
  json predicted;
  predicted["u"] = analytic_gain(setup.schedule.signal_mu, setup.channel);
  predicted["v"] = analytic_gain(setup.schedule.decoy_mu, setup.channel);
  predicted["vac"] = analytic_gain(0.0, setup.channel);
  block["gain_predicted"] = predicted;
  return block;
}

json key_rate_block(const RunConfig& config, const PairSetup& setup,
                    const DecoyStatistics& stats) {
  DecoyBoundsResult bounds;
  std::string bounds_error;
  try {
    bounds = decoy_bounds(stats, setup.schedule);
  } catch (const AnalysisError& err) {
    bounds.insufficient_statistics = true;
    bounds_error = err.what();
  }
  const KeyRateReport report =
      secret_key_rate(stats, bounds, setup.schedule, config.f_ec,
                      config.session.rep_rate_hz);
  json block;
  if (!bounds_error.empty()) block["bounds_error"] = bounds_error;
  block["y1_lower"] = report.y1_lower;
  block["e1_upper"] = report.e1_upper;
  block["q1_lower"] = report.q1_lower;
  block["rate_per_pulse"] = report.rate_per_pulse;
  block["rate_per_second"] = report.rate_per_second;
  block["extractable_rate_per_second"] = report.extractable_rate_per_second;
  block["qber"] = report.qber;
  block["attack_limit_ok"] = report.attack_limit_ok;
  block["secure_key"] = report.secure_key;
  block["clamped"] = report.clamped;
  block["insufficient_statistics"] = report.insufficient_statistics;
  block["f_ec"] = report.f_ec;
  block["info_rate_per_second"] = report.info_rate_per_second;
  return block;
}

}  // namespace

nlohmann::json build_key_rate_report(
    const RunConfig& config, const std::vector<DecoyStatistics>& stats) {
  json report;
  report["format_version"] = kReportFormatVersion;
  report["config"] = config.echo;
  json pairs = json::array();
  for (std::size_t p = 0; p < stats.size(); ++p) {
    const PairSetup& setup = config.session.pairs.at(p);
    json entry;
    entry["pair"] = p;
    entry["statistics"] = statistics_block(setup, stats[p]);
    entry["key_rate"] = key_rate_block(config, setup, stats[p]);
    pairs.push_back(std::move(entry));
  }
  report["pairs"] = std::move(pairs);
  return report;
}

nlohmann::json build_tomography_report(
    const RunConfig& config, const std::vector<TomographyResult>& results) {
  json report;
  report["format_version"] = kReportFormatVersion;
  report["config"] = config.echo;
  json pairs = json::array();
  for (std::size_t p = 0; p < results.size(); ++p) {
    json entry;
    entry["pair"] = p;
    entry["matrix"] = results[p].matrix;
    entry["fidelity"] = results[p].fidelity;
    entry["bhattacharyya_mean"] = results[p].bhattacharyya_mean;
    entry["min_block_clicks"] = results[p].min_block_clicks;
    pairs.push_back(std::move(entry));
  }
  report["pairs"] = std::move(pairs);
  return report;
}

nlohmann::json sweep_to_json(const RunConfig& config, const SweepResult& sweep) {
  json report;
  report["format_version"] = kReportFormatVersion;
  report["config"] = config.echo;
  json rows = json::array();
  for (const SweepRow& row : sweep.rows) {
    rows.push_back({{"scheme", scheme_name(row.scheme)},
                    {"N", row.n},
                    {"length_km", row.length_km},
                    {"eta", row.eta},
                    {"rate", row.rate},
                    {"noise_floor", row.noise_floor}});
  }
  report["rows"] = std::move(rows);
  report["skipped"] = sweep.skipped;
  return report;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "# format_version=" << kReportFormatVersion << "\n";
  const bool noise = !sweep.rows.empty() && sweep.rows.front().noise_floor;
  out << "# noise_floor=" << (noise ? "on" : "off") << "\n";
  out << "scheme,N,length_km,eta,rate\n";
  for (const SweepRow& row : sweep.rows) {
    out << scheme_name(row.scheme) << ',' << row.n << ','
        << number_text(row.length_km) << ',' << number_text(row.eta) << ','
        << number_text(row.rate) << '\n';
  }
  return out.str();
}

std::string tomography_report_to_csv(const nlohmann::json& report) {
  std::ostringstream out;
  out << "# format_version=" << kReportFormatVersion << "\n";
  out << "pair,prepared,p_X0,p_X1,p_Z0,p_Z1,fidelity,bhattacharyya_mean\n";
  static const char* kRows[4] = {"X0", "X1", "Z0", "Z1"};
  for (const auto& entry : report.at("pairs")) {
    const auto& matrix = entry.at("matrix");
    for (int row = 0; row < 4; ++row) {
      out << entry.at("pair").get<std::uint64_t>() << ',' << kRows[row];
      for (int col = 0; col < 4; ++col) {
        out << ',' << number_text(matrix.at(row).at(col).get<double>());
      }
      out << ',' << number_text(entry.at("fidelity").get<double>()) << ','
          << number_text(entry.at("bhattacharyya_mean").get<double>()) << '\n';
    }
  }
  return out.str();
}

std::string key_rate_report_to_csv(const nlohmann::json& report) {
  std::ostringstream out;
  out << "# format_version=" << kReportFormatVersion << "\n";
  out << "pair,Q_u,Q_v,vacuum_yield,E_u,E_v,y1_lower,e1_upper,"
         "rate_per_pulse,rate_per_second,secure_key\n";
  for (const auto& entry : report.at("pairs")) {
    const auto& stats = entry.at("statistics");
    const auto& rate = entry.at("key_rate");
    const auto cell = [](const nlohmann::json& v) {
      return v.is_null() ? std::string() : v.dump();
    };
    out << entry.at("pair").get<std::uint64_t>() << ','
        << cell(stats.at("gain").at("u")) << ','
        << cell(stats.at("gain").at("v")) << ','
        << cell(stats.at("vacuum_yield")) << ','
        << cell(stats.at("qber").at("u")) << ','
        << cell(stats.at("qber").at("v")) << ','
        << cell(rate.at("y1_lower")) << ',' << cell(rate.at("e1_upper")) << ','
        << cell(rate.at("rate_per_pulse")) << ','
        << cell(rate.at("rate_per_second")) << ','
        << (rate.at("secure_key").get<bool>() ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed while writing '" + path + "'");
}

}  // namespace sdmqkd
