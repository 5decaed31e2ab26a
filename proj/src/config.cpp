#include "sdmqkd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sdmqkd/errors.hpp"

namespace sdmqkd {

const char* subcommand_name(Subcommand sub) {
  switch (sub) {
    case Subcommand::Simulate:
      return "simulate";
    case Subcommand::Analyze:
      return "analyze";
    case Subcommand::Tomography:
      return "tomography";
    case Subcommand::Compare:
      return "compare";
  }
  return "?";
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, RawEntry>;
using RawConfig = std::map<std::string, Section>;

// Every key the parser accepts, per section. Anything else is an error.
const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"channel",
       {"alice_loss_db", "fiber_alpha_db_per_km", "fiber_length_km",
        "bob_loss_db", "crosstalk_db", "det_efficiency", "dark_count_prob",
        "e_det"}},
      {"session",
       {"n_pulses", "rep_rate_hz", "basis_prob_x", "n_core_pairs",
        "prbs_seeds", "master_seed"}},
      {"schedule", {"u", "v", "p_u", "p_v", "p_vac"}},
      {"analysis", {"f_ec"}},
      {"tomography", {"pulses_per_state", "min_block_clicks"}},
      {"compare",
       {"schemes", "sweep", "n_min", "n_max", "n_step", "length_km",
        "length_min_km", "length_max_km", "length_step_km", "cdma_weight",
        "cdma_code_length", "noise_floor"}},
      {"output", {"pulse_log"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

[[noreturn]] void fail(int line, const std::string& message) {
  std::ostringstream msg;
  msg << "config line " << line << ": " << message;
  throw ConfigError(msg.str());
}

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
    if (trimmed.front() == '[') {
      if (trimmed.back() != ']') fail(line_no, "unterminated section header");
      section = trim(trimmed.substr(1, trimmed.size() - 2));
      if (known_keys().find(section) == known_keys().end()) {
        fail(line_no, "unknown section '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    if (section.empty()) fail(line_no, "key outside of any [section]");
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    const auto& allowed = known_keys().at(section);
    if (allowed.find(key) == allowed.end()) {
      fail(line_no, "unknown key '" + section + "." + key + "'");
    }
    if (value.empty()) fail(line_no, "empty value for '" + section + "." + key + "'");
    auto [it, inserted] = raw[section].emplace(key, RawEntry{value, line_no});
    if (!inserted) {
      fail(line_no, "duplicate key '" + section + "." + key + "'");
    }
  }
  return raw;
}

class ConfigReader {
 public:
  explicit ConfigReader(RawConfig raw) : raw_(std::move(raw)) {}

  bool has(const std::string& section, const std::string& key) const {
    const auto sec = raw_.find(section);
    return sec != raw_.end() && sec->second.find(key) != sec->second.end();
  }

  const RawEntry* entry(const std::string& section, const std::string& key) const {
    const auto sec = raw_.find(section);
    if (sec == raw_.end()) return nullptr;
    const auto it = sec->second.find(key);
    return it == sec->second.end() ? nullptr : &it->second;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback, bool* defaulted = nullptr) const {
    const RawEntry* e = entry(section, key);
    if (defaulted != nullptr) *defaulted = e == nullptr;
    if (e == nullptr) return fallback;
    return parse_double(*e, section, key);
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback, bool* defaulted = nullptr) const {
    const RawEntry* e = entry(section, key);
    if (defaulted != nullptr) *defaulted = e == nullptr;
    if (e == nullptr) return fallback;
    try {
      std::size_t used = 0;
      const std::uint64_t value = std::stoull(e->value, &used, 0);
      if (used != e->value.size()) throw std::invalid_argument("");
      return value;
    } catch (const std::exception&) {
      fail(e->line, "'" + section + "." + key + "' expects an unsigned integer");
    }
  }

  int get_int(const std::string& section, const std::string& key, int fallback,
              bool* defaulted = nullptr) const {
    const RawEntry* e = entry(section, key);
    if (defaulted != nullptr) *defaulted = e == nullptr;
    if (e == nullptr) return fallback;
    try {
      std::size_t used = 0;
      const int value = std::stoi(e->value, &used, 0);
      if (used != e->value.size()) throw std::invalid_argument("");
      return value;
    } catch (const std::exception&) {
      fail(e->line, "'" + section + "." + key + "' expects an integer");
    }
  }

  bool get_bool(const std::string& section, const std::string& key,
                bool fallback, bool* defaulted = nullptr) const {
    const RawEntry* e = entry(section, key);
    if (defaulted != nullptr) *defaulted = e == nullptr;
    if (e == nullptr) return fallback;
    const std::string& v = e->value;
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    fail(e->line, "'" + section + "." + key + "' expects true or false");
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback,
                         bool* defaulted = nullptr) const {
    const RawEntry* e = entry(section, key);
    if (defaulted != nullptr) *defaulted = e == nullptr;
    return e == nullptr ? fallback : e->value;
  }

  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (e == nullptr) return {};
    std::vector<double> values;
    for (const std::string& item : split(e->value)) {
      values.push_back(parse_double(RawEntry{item, e->line}, section, key));
    }
    return values;
  }

  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (e == nullptr) return {};
    return split(e->value);
  }

  std::vector<std::uint64_t> get_u64_list(const std::string& section,
                                          const std::string& key) const {
    const RawEntry* e = entry(section, key);
    if (e == nullptr) return {};
    std::vector<std::uint64_t> values;
    for (const std::string& item : split(e->value)) {
      try {
        std::size_t used = 0;
        values.push_back(std::stoull(item, &used, 0));
        if (used != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(e->line, "'" + section + "." + key + "' expects unsigned integers");
      }
    }
    return values;
  }

  int line_of(const std::string& section, const std::string& key) const {
    const RawEntry* e = entry(section, key);
    return e == nullptr ? 0 : e->line;
  }

 private:
  static std::vector<std::string> split(const std::string& value) {
    std::vector<std::string> items;
    std::string current;
    std::istringstream stream(value);
    while (std::getline(stream, current, ',')) {
      items.push_back(trim(current));
    }
    return items;
  }

  static double parse_double(const RawEntry& e, const std::string& section,
                             const std::string& key) {
    try {
      std::size_t used = 0;
      const double value = std::stod(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("");
      return value;
    } catch (const std::exception&) {
      fail(e.line, "'" + section + "." + key + "' expects a number");
    }
  }

  RawConfig raw_;
};

// Broadcast a per-pair list: scalar values apply to every pair.
std::vector<double> broadcast(std::vector<double> values, double fallback,
                              std::size_t n_pairs, const std::string& name,
                              int line, bool* defaulted) {
  *defaulted = values.empty();
  if (values.empty()) values.assign(n_pairs, fallback);
  if (values.size() == 1 && n_pairs > 1) values.assign(n_pairs, values[0]);
  if (values.size() != n_pairs) {
    fail(line == 0 ? 1 : line,
         "'" + name + "' needs 1 value or one per core pair");
  }
  return values;
}

nlohmann::json json_double_or_inf(double value) {
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  return value;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, Subcommand subcommand,
                            std::optional<std::uint64_t> seed_override) {
  ConfigReader reader(tokenize(text));
  RunConfig config;
  config.subcommand = subcommand;

  std::vector<std::string> defaults_applied;
  const auto note_default = [&defaults_applied](bool defaulted,
                                                const char* name) {
    if (defaulted) defaults_applied.push_back(name);
  };
  bool d = false;

  // --- session ---------------------------------------------------------
  const std::size_t n_pairs =
      static_cast<std::size_t>(reader.get_u64("session", "n_core_pairs", 1, &d));
  note_default(d, "session.n_core_pairs");
  if (n_pairs < 1) fail(reader.line_of("session", "n_core_pairs"),
                        "'session.n_core_pairs' must be >= 1");

  SessionConfig& session = config.session;
  session.n_pulses = reader.get_u64("session", "n_pulses", 0, &d);
  const bool n_pulses_given = !d;
  session.rep_rate_hz = reader.get_double("session", "rep_rate_hz", 5000.0, &d);
  note_default(d, "session.rep_rate_hz");
  session.basis_prob_x = reader.get_double("session", "basis_prob_x", 0.5, &d);
  note_default(d, "session.basis_prob_x");
  session.master_seed = reader.get_u64("session", "master_seed", 1, &d);
  note_default(d, "session.master_seed");
  if (seed_override.has_value()) session.master_seed = *seed_override;

  const bool needs_session = subcommand != Subcommand::Compare;
  if (needs_session && subcommand != Subcommand::Tomography && !n_pulses_given) {
    throw ConfigError("missing required key 'session.n_pulses'");
  }

  // --- channel (per-pair lists allowed on det_efficiency and e_det) -----
  ChannelParams base;
  base.alice_loss_db = reader.get_double("channel", "alice_loss_db", 0.0, &d);
  note_default(d, "channel.alice_loss_db");
  base.fiber_alpha_db_per_km =
      reader.get_double("channel", "fiber_alpha_db_per_km", 0.0, &d);
  note_default(d, "channel.fiber_alpha_db_per_km");
  base.fiber_length_km = reader.get_double("channel", "fiber_length_km", 0.0, &d);
  note_default(d, "channel.fiber_length_km");
  base.bob_loss_db = reader.get_double("channel", "bob_loss_db", 0.0, &d);
  note_default(d, "channel.bob_loss_db");
  base.crosstalk_db =
      reader.get_double("channel", "crosstalk_db",
                        -std::numeric_limits<double>::infinity(), &d);
  note_default(d, "channel.crosstalk_db");
  base.dark_count_prob = reader.get_double("channel", "dark_count_prob", 0.0, &d);
  note_default(d, "channel.dark_count_prob");

  bool det_defaulted = false;
  const std::vector<double> det_eff = broadcast(
      reader.get_double_list("channel", "det_efficiency"), 1.0, n_pairs,
      "channel.det_efficiency", reader.line_of("channel", "det_efficiency"),
      &det_defaulted);
  note_default(det_defaulted, "channel.det_efficiency");
  bool e_det_defaulted = false;
  const std::vector<double> e_det = broadcast(
      reader.get_double_list("channel", "e_det"), 0.0, n_pairs, "channel.e_det",
      reader.line_of("channel", "e_det"), &e_det_defaulted);
  note_default(e_det_defaulted, "channel.e_det");

  // --- schedule ----------------------------------------------------------
  std::vector<double> signal_mu = reader.get_double_list("schedule", "u");
  if (needs_session && signal_mu.empty()) {
    throw ConfigError("missing required key 'schedule.u'");
  }
  note_default(signal_mu.empty(), "schedule.u");
  if (signal_mu.empty()) signal_mu = {0.5};
  bool mu_defaulted = false;
  signal_mu = broadcast(signal_mu, 0.5, n_pairs, "schedule.u",
                        reader.line_of("schedule", "u"), &mu_defaulted);
  (void)mu_defaulted;

  std::vector<double> decoy_mu = reader.get_double_list("schedule", "v");
  const bool v_defaulted = decoy_mu.empty();
  note_default(v_defaulted, "schedule.v");
  if (v_defaulted) {
    decoy_mu.resize(n_pairs);
    for (std::size_t p = 0; p < n_pairs; ++p) decoy_mu[p] = signal_mu[p] / 2.0;
  } else {
    bool ignored = false;
    decoy_mu = broadcast(decoy_mu, 0.0, n_pairs, "schedule.v",
                         reader.line_of("schedule", "v"), &ignored);
  }

  const double p_signal = reader.get_double("schedule", "p_u", 0.7, &d);
  note_default(d, "schedule.p_u");
  const double p_decoy = reader.get_double("schedule", "p_v", 0.2, &d);
  note_default(d, "schedule.p_v");
  const double p_vacuum = reader.get_double("schedule", "p_vac", 0.1, &d);
  note_default(d, "schedule.p_vac");

  // --- seeds -------------------------------------------------------------
  std::vector<std::uint64_t> prbs_seeds =
      reader.get_u64_list("session", "prbs_seeds");
  if (!prbs_seeds.empty() && prbs_seeds.size() != n_pairs) {
    fail(reader.line_of("session", "prbs_seeds"),
         "'session.prbs_seeds' needs one seed per core pair");
  }
  note_default(prbs_seeds.empty(), "session.prbs_seeds");

  session.pairs.clear();
  for (std::size_t p = 0; p < n_pairs; ++p) {
    PairSetup setup;
    setup.channel = base;
    setup.channel.det_efficiency = det_eff[p];
    setup.channel.e_det = e_det[p];
    setup.schedule.signal_mu = signal_mu[p];
    setup.schedule.decoy_mu = decoy_mu[p];
    setup.schedule.p_signal = p_signal;
    setup.schedule.p_decoy = p_decoy;
    setup.schedule.p_vacuum = p_vacuum;
    if (!prbs_seeds.empty()) {
      if (prbs_seeds[p] == 0 || prbs_seeds[p] > 0x7FFFFFFFull) {
        fail(reader.line_of("session", "prbs_seeds"),
             "'session.prbs_seeds' entries must be nonzero 31-bit values");
      }
      setup.prbs_seed = static_cast<std::uint32_t>(prbs_seeds[p]);
    }
    session.pairs.push_back(setup);
  }

  if (needs_session) {
    session.validate();  // range checks name the offending field
  }

  // --- analysis / tomography ---------------------------------------------
  config.f_ec = reader.get_double("analysis", "f_ec",
                                  kDefaultErrorCorrectionFactor, &d);
  note_default(d, "analysis.f_ec");
  if (config.f_ec < 1.0) {
    fail(reader.line_of("analysis", "f_ec"), "'analysis.f_ec' must be >= 1");
  }
  config.tomography_pulses_per_state =
      reader.get_u64("tomography", "pulses_per_state", 200000, &d);
  note_default(d, "tomography.pulses_per_state");
  config.tomography_min_block_clicks =
      reader.get_u64("tomography", "min_block_clicks", 100, &d);
  note_default(d, "tomography.min_block_clicks");

  // --- compare -------------------------------------------------------------
  std::vector<std::string> scheme_names =
      reader.get_string_list("compare", "schemes");
  note_default(scheme_names.empty(), "compare.schemes");
  if (scheme_names.empty()) {
    scheme_names = {"SDM", "HD", "WDM", "TDM", "CDMA"};
  }
  const std::string sweep_kind = reader.get_string("compare", "sweep", "cores", &d);
  note_default(d, "compare.sweep");
  if (sweep_kind == "cores") {
    config.sweep.variable = SweepVariable::Cores;
  } else if (sweep_kind == "length") {
    config.sweep.variable = SweepVariable::Length;
  } else {
    fail(reader.line_of("compare", "sweep"),
         "'compare.sweep' must be 'cores' or 'length'");
  }
  config.sweep.n_min = reader.get_int("compare", "n_min", 2, &d);
  note_default(d, "compare.n_min");
  config.sweep.n_max = reader.get_int("compare", "n_max", 16, &d);
  note_default(d, "compare.n_max");
  config.sweep.n_step = reader.get_int("compare", "n_step", 1, &d);
  note_default(d, "compare.n_step");
  config.sweep.length_min_km =
      reader.get_double("compare", "length_min_km", 0.0, &d);
  config.sweep.length_max_km =
      reader.get_double("compare", "length_max_km", 100.0, &d);
  config.sweep.length_step_km =
      reader.get_double("compare", "length_step_km", 10.0, &d);

  const double compare_length = reader.get_double("compare", "length_km", 50.0, &d);
  note_default(d, "compare.length_km");
  const double cdma_weight = reader.get_double("compare", "cdma_weight", 0.5, &d);
  note_default(d, "compare.cdma_weight");
  const int cdma_code_length =
      reader.get_int("compare", "cdma_code_length", config.sweep.n_max, &d);
  note_default(d, "compare.cdma_code_length");
  config.noise_floor.enabled = reader.get_bool("compare", "noise_floor", false, &d);
  note_default(d, "compare.noise_floor");
  config.noise_floor.dark_count_prob = base.dark_count_prob;

  LinkBudget link;
  link.fiber_alpha_db_per_km = base.fiber_alpha_db_per_km;
  link.fiber_length_km = compare_length;
  link.receiver_loss_db = base.bob_loss_db;
  link.det_efficiency = det_eff[0];

  config.schemes.clear();
  for (const std::string& name : scheme_names) {
    SchemeParams params;
    params.scheme = scheme_from_name(name);
    params.n = config.sweep.n_min;
    params.cdma_weight = cdma_weight;
    params.cdma_code_length = cdma_code_length;
    params.link = link;
    config.schemes.push_back(params);
  }

  // --- output ---------------------------------------------------------------
  config.pulse_log_path = reader.get_string("output", "pulse_log", "", &d);
  if (subcommand == Subcommand::Analyze && config.pulse_log_path.empty()) {
    throw ConfigError("analyze requires 'output.pulse_log'");
  }

  // --- echo -------------------------------------------------------------------
  nlohmann::json echo;
  echo["channel"] = {
      {"alice_loss_db", base.alice_loss_db},
      {"fiber_alpha_db_per_km", base.fiber_alpha_db_per_km},
      {"fiber_length_km", base.fiber_length_km},
      {"bob_loss_db", base.bob_loss_db},
      {"crosstalk_db", json_double_or_inf(base.crosstalk_db)},
      {"det_efficiency", det_eff},
      {"dark_count_prob", base.dark_count_prob},
      {"e_det", e_det},
  };
  std::vector<std::uint32_t> resolved_seeds;
  for (std::size_t p = 0; p < session.pairs.size(); ++p) {
    resolved_seeds.push_back(
        session.pairs[p].prbs_seed != 0
            ? session.pairs[p].prbs_seed
            : pair_streams(session.master_seed, static_cast<std::uint32_t>(p))
                  .default_prbs_seed);
  }
  echo["session"] = {
      {"n_pulses", session.n_pulses},
      {"rep_rate_hz", session.rep_rate_hz},
      {"basis_prob_x", session.basis_prob_x},
      {"n_core_pairs", n_pairs},
      {"master_seed", session.master_seed},
      {"prbs_seeds", resolved_seeds},
  };
  echo["schedule"] = {
      {"u", signal_mu}, {"v", decoy_mu},       {"p_u", p_signal},
      {"p_v", p_decoy}, {"p_vac", p_vacuum},
  };
  echo["analysis"] = {{"f_ec", config.f_ec}};
  echo["tomography"] = {
      {"pulses_per_state", config.tomography_pulses_per_state},
      {"min_block_clicks", config.tomography_min_block_clicks},
  };
  echo["compare"] = {
      {"schemes", scheme_names},
      {"sweep", sweep_kind},
      {"n_min", config.sweep.n_min},
      {"n_max", config.sweep.n_max},
      {"n_step", config.sweep.n_step},
      {"length_km", compare_length},
      {"length_min_km", config.sweep.length_min_km},
      {"length_max_km", config.sweep.length_max_km},
      {"length_step_km", config.sweep.length_step_km},
      {"cdma_weight", cdma_weight},
      {"cdma_code_length", cdma_code_length},
      {"noise_floor", config.noise_floor.enabled},
  };
  echo["output"] = {{"pulse_log", config.pulse_log_path}};
  std::sort(defaults_applied.begin(), defaults_applied.end());
  echo["defaults_applied"] = defaults_applied;
  config.echo = std::move(echo);
  return config;
}

RunConfig parse_config_file(const std::string& path, Subcommand subcommand,
                            std::optional<std::uint64_t> seed_override) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config_text(text.str(), subcommand, seed_override);
}

}  // namespace sdmqkd
