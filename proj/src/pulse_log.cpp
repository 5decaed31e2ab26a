#include "sdmqkd/pulse_log.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "sdmqkd/errors.hpp"

namespace sdmqkd {

namespace {

const char* class_token(IntensityClass cls) {
  return kClassLabels[static_cast<std::size_t>(cls)];
}

IntensityClass class_from_token(const std::string& token, int line) {
  if (token == "u") return IntensityClass::Signal;
  if (token == "v") return IntensityClass::Decoy;
  if (token == "vac") return IntensityClass::Vacuum;
  throw IoError("pulse log line " + std::to_string(line) +
                ": bad intensity class '" + token + "'");
}

char basis_token(Basis basis) { return basis == Basis::X ? 'X' : 'Z'; }

Basis basis_from_token(const std::string& token, int line) {
  if (token == "X") return Basis::X;
  if (token == "Z") return Basis::Z;
  throw IoError("pulse log line " + std::to_string(line) + ": bad basis '" +
                token + "'");
}

}  // namespace

PulseLogWriter::PulseLogWriter(const std::string& path,
                               const PulseLogHeader& header)
    : out_(path), path_(path) {
  if (!out_) throw IoError("cannot open pulse log '" + path + "' for writing");
  out_ << "# sdmqkd pulse log\n";
  out_ << "# format_version=" << header.format_version << "\n";
  out_ << "# n_core_pairs=" << header.n_core_pairs << "\n";
  out_ << "# master_seed=" << header.master_seed << "\n";
  if (!header.config_json.empty()) {
    out_ << "# config=" << header.config_json << "\n";
  }
  out_ << "pulse_index,pair,class,alice_basis,alice_bit,bob_basis,"
          "clicked0,clicked1,bob_bit\n";
}

void PulseLogWriter::write(const LoggedPulse& record) {
  char buffer[96];
  char bob_bit[2] = {'-', '\0'};
  if (record.bob_bit >= 0) bob_bit[0] = static_cast<char>('0' + record.bob_bit);
  const int len = std::snprintf(
      buffer, sizeof(buffer), "%" PRIu64 ",%u,%s,%c,%u,%c,%u,%u,%s\n",
      record.pulse.pulse_index, record.pulse.core_pair,
      class_token(record.pulse.cls), basis_token(record.pulse.basis),
      static_cast<unsigned>(record.pulse.bit),
      basis_token(record.detection.basis),
      record.detection.clicked_0 ? 1u : 0u, record.detection.clicked_1 ? 1u : 0u,
      bob_bit);
  out_.write(buffer, len);
}

void PulseLogWriter::close() {
  out_.flush();
  if (!out_) throw IoError("failed to write pulse log '" + path_ + "'");
  out_.close();
}

PulseLogHeader read_pulse_log(
    const std::string& path,
    const std::function<void(const LoggedPulse&)>& visit) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pulse log '" + path + "'");

  PulseLogHeader header;
  header.format_version = 0;
  std::string line;
  int line_no = 0;
  bool saw_column_row = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto parse_field = [&](const char* name, auto& out_value) {
        const std::string prefix = std::string("# ") + name + "=";
        if (line.rfind(prefix, 0) == 0) {
          std::istringstream value(line.substr(prefix.size()));
          value >> out_value;
          if (!value) {
            throw IoError("pulse log line " + std::to_string(line_no) +
                          ": bad header field '" + name + "'");
          }
        }
      };
      parse_field("format_version", header.format_version);
      parse_field("n_core_pairs", header.n_core_pairs);
      parse_field("master_seed", header.master_seed);
      if (line.rfind("# config=", 0) == 0) {
        header.config_json = line.substr(9);
      }
      continue;
    }
    if (!saw_column_row) {
      // First non-comment line is the column header.
      if (line.rfind("pulse_index,", 0) != 0) {
        throw IoError("pulse log line " + std::to_string(line_no) +
                      ": missing column header");
      }
      if (header.format_version != kPulseLogFormatVersion) {
        throw IoError("pulse log '" + path + "': unsupported format_version " +
                      std::to_string(header.format_version));
      }
      saw_column_row = true;
      continue;
    }

    std::array<std::string, 9> fields;
    std::size_t field = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (field >= fields.size()) {
          throw IoError("pulse log line " + std::to_string(line_no) +
                        ": too many fields");
        }
        fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != fields.size()) {
      throw IoError("pulse log line " + std::to_string(line_no) +
                    ": expected 9 fields");
    }

    try {
      LoggedPulse record;
      record.pulse.pulse_index = std::stoull(fields[0]);
      record.pulse.core_pair = static_cast<std::uint32_t>(std::stoul(fields[1]));
      record.pulse.cls = class_from_token(fields[2], line_no);
      record.pulse.basis = basis_from_token(fields[3], line_no);
      record.pulse.bit = static_cast<std::uint8_t>(std::stoul(fields[4]));
      record.detection.basis = basis_from_token(fields[5], line_no);
      record.detection.clicked_0 = fields[6] == "1";
      record.detection.clicked_1 = fields[7] == "1";
      record.detection.pulse_index = record.pulse.pulse_index;
      record.bob_bit = fields[8] == "-" ? -1 : std::stoi(fields[8]);
      const bool clicked = record.detection.clicked_0 || record.detection.clicked_1;
      if (clicked != (record.bob_bit >= 0)) {
        throw IoError("pulse log line " + std::to_string(line_no) +
                      ": click flags and bob_bit disagree");
      }
      visit(record);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError("pulse log line " + std::to_string(line_no) +
                    ": malformed record");
    }
  }
  if (!saw_column_row) {
    throw IoError("pulse log '" + path + "' has no records header");
  }
  return header;
}

}  // namespace sdmqkd
