#pragma once

#include <string>
#include <vector>

// Closed-form achievable-rate comparison of multiplexing strategies over
// one fiber link: parallel independent keys over core pairs (SDM) against
// high-dimensional encoding (HD), wavelength (WDM), time (TDM) and code
// (CDMA) division multiplexing.

namespace sdmqkd {

enum class Scheme { SDM, HD, WDM, TDM, CDMA };

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);  // throws ConfigError

struct LinkBudget {
  double fiber_alpha_db_per_km = 0.37;
  double fiber_length_km = 0.0;
  double receiver_loss_db = 0.0;
  double det_efficiency = 1.0;
};

struct SchemeParams {
  Scheme scheme = Scheme::SDM;
  int n = 2;                  // cores / dimensions / wavelengths / users
  double cdma_weight = 0.0;   // 0 < w < 1, CDMA only
  int cdma_code_length = 0;   // N_c >= n, CDMA only
  LinkBudget link;

  void validate() const;
};

// eta = 10^(-alpha * length / 10)
double eta_from_distance(double alpha_db_per_km, double length_km);

// Fiber, receiver and detector transmittances folded multiplicatively.
double effective_eta(const LinkBudget& link);

// Relative achievable rate of one scheme at its link budget:
//   HD:   log2(N) (1 - e^-eta)
//   SDM:  (N/2)   (1 - e^-eta)
//   WDM:  N       (1 - e^-eta)
//   TDM:  N       (1 - e^-(eta/N))
//   CDMA: [(1-w^2)/N_c]^(N-1) (1 - e^-(eta/N))
double scheme_rate(const SchemeParams& params);

// Optional dark-count penalty: the plain rates above are multiplied by
// 1 - h2(e_floor) with e_floor the dark-induced error fraction of the
// per-channel click probability. An approximation, off by default.
struct NoiseFloor {
  bool enabled = false;
  double dark_count_prob = 0.0;
};

double scheme_rate(const SchemeParams& params, const NoiseFloor& noise);

struct SweepRow {
  Scheme scheme;
  int n;
  double length_km;
  double eta;   // effective eta after receiver loss and det efficiency
  double rate;
  bool noise_floor;
};

enum class SweepVariable { Cores, Length };

struct SweepSpec {
  SweepVariable variable = SweepVariable::Cores;
  int n_min = 2;
  int n_max = 16;
  int n_step = 1;
  double length_min_km = 0.0;
  double length_max_km = 0.0;
  double length_step_km = 10.0;
};

// Evaluates every scheme over the sweep grid. Rows whose parameters are
// invalid for a scheme (e.g. odd N for SDM) are skipped and reported
// through `skipped`, so one bad row never aborts the sweep.
struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> skipped;  // human-readable row diagnostics
};

SweepResult compare_sweep(const std::vector<SchemeParams>& schemes,
                          const SweepSpec& sweep,
                          const NoiseFloor& noise = NoiseFloor{});

}  // namespace sdmqkd
