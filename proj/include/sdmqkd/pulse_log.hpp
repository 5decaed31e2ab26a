#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>

#include "sdmqkd/protocol.hpp"

// Line-delimited per-pulse session log, one record per pulse and core
// pair. Layout (after the '#' header lines):
//
//   pulse_index,pair,class,alice_basis,alice_bit,bob_basis,clicked0,clicked1,bob_bit
//
// class is u|v|vac, bases are X|Z, clicks are 0|1, and bob_bit is the
// double-click-resolved outcome or '-' when nothing clicked. The header
// carries format_version, the pair count and the master seed, so an
// analyzer can rebuild the session statistics without the original run.

namespace sdmqkd {

inline constexpr int kPulseLogFormatVersion = 1;

struct PulseLogHeader {
  int format_version = kPulseLogFormatVersion;
  std::uint32_t n_core_pairs = 0;
  std::uint64_t master_seed = 0;
  // Fully-resolved run configuration as a single JSON line, embedded so the
  // log is self-describing; empty when unavailable.
  std::string config_json;
};

class PulseLogWriter {
 public:
  PulseLogWriter(const std::string& path, const PulseLogHeader& header);

  void write(const LoggedPulse& record);

  // Flushes and verifies the stream; throws IoError on failure.
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

// Streams every record through `visit` and returns the parsed header.
// Malformed content raises IoError with the offending line number.
PulseLogHeader read_pulse_log(const std::string& path,
                              const std::function<void(const LoggedPulse&)>& visit);

}  // namespace sdmqkd
