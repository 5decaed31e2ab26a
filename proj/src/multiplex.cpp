#include "sdmqkd/multiplex.hpp"

#include <cmath>
#include <sstream>

#include "sdmqkd/analysis.hpp"
#include "sdmqkd/errors.hpp"

namespace sdmqkd {

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::SDM:
      return "SDM";
    case Scheme::HD:
      return "HD";
    case Scheme::WDM:
      return "WDM";
    case Scheme::TDM:
      return "TDM";
    case Scheme::CDMA:
      return "CDMA";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "SDM") return Scheme::SDM;
  if (name == "HD") return Scheme::HD;
  if (name == "WDM") return Scheme::WDM;
  if (name == "TDM") return Scheme::TDM;
  if (name == "CDMA") return Scheme::CDMA;
  throw ConfigError("unknown multiplexing scheme '" + name + "'");
}

void SchemeParams::validate() const {
  if (n < 2) throw ConfigError("scheme: n must be >= 2");
  if (scheme == Scheme::SDM && n % 2 != 0) {
    throw ConfigError("scheme: SDM needs an even core count (keys = N/2)");
  }
  if (scheme == Scheme::CDMA) {
    if (!(cdma_weight > 0.0 && cdma_weight < 1.0)) {
      throw ConfigError("scheme: CDMA weight must be in (0, 1)");
    }
    if (cdma_code_length < n) {
      throw ConfigError("scheme: CDMA code length must be >= n");
    }
  }
  if (link.fiber_alpha_db_per_km < 0.0 || link.fiber_length_km < 0.0 ||
      link.receiver_loss_db < 0.0) {
    throw ConfigError("scheme: losses must be >= 0");
  }
  if (!(link.det_efficiency > 0.0 && link.det_efficiency <= 1.0)) {
    throw ConfigError("scheme: det_efficiency must be in (0, 1]");
  }
}

double eta_from_distance(double alpha_db_per_km, double length_km) {
  if (alpha_db_per_km < 0.0 || length_km < 0.0) {
    throw ConfigError("eta_from_distance: alpha and length must be >= 0");
  }
  return std::pow(10.0, -alpha_db_per_km * length_km / 10.0);
}

double effective_eta(const LinkBudget& link) {
  return eta_from_distance(link.fiber_alpha_db_per_km, link.fiber_length_km) *
         std::pow(10.0, -link.receiver_loss_db / 10.0) * link.det_efficiency;
}

double scheme_rate(const SchemeParams& params) {
  return scheme_rate(params, NoiseFloor{});
}

double scheme_rate(const SchemeParams& params, const NoiseFloor& noise) {
  params.validate();
  const double eta = effective_eta(params.link);
  const double n = static_cast<double>(params.n);

  double channels = 0.0;
  double per_channel_eta = eta;
  switch (params.scheme) {
    case Scheme::HD:
      channels = std::log2(n);
      break;
    case Scheme::SDM:
      channels = n / 2.0;
      break;
    case Scheme::WDM:
      channels = n;
      break;
    case Scheme::TDM:
      channels = n;
      per_channel_eta = eta / n;
      break;
    case Scheme::CDMA:
      channels = std::pow(
          (1.0 - params.cdma_weight * params.cdma_weight) /
              static_cast<double>(params.cdma_code_length),
          n - 1.0);
      per_channel_eta = eta / n;
      break;
  }

  const double click = 1.0 - std::exp(-per_channel_eta);
  double rate = channels * click;

  if (noise.enabled && noise.dark_count_prob > 0.0) {
    const double y0 = 1.0 - (1.0 - noise.dark_count_prob) *
                                (1.0 - noise.dark_count_prob);
    const double total_click = click + (1.0 - click) * y0;
    if (total_click > 0.0) {
      const double e_floor = 0.5 * y0 * (1.0 - click) / total_click;
      rate *= 1.0 - binary_entropy(std::min(e_floor, 0.5));
    }
  }
  return rate;
}

SweepResult compare_sweep(const std::vector<SchemeParams>& schemes,
                          const SweepSpec& sweep, const NoiseFloor& noise) {
  if (schemes.empty()) {
    throw ConfigError("compare_sweep: scheme list is empty");
  }

  std::vector<double> lengths;
  std::vector<int> cores;
  if (sweep.variable == SweepVariable::Cores) {
    if (sweep.n_min < 2 || sweep.n_max < sweep.n_min || sweep.n_step < 1) {
      throw ConfigError("compare_sweep: invalid core sweep range");
    }
    for (int n = sweep.n_min; n <= sweep.n_max; n += sweep.n_step) {
      cores.push_back(n);
    }
  } else {
    if (sweep.length_min_km < 0.0 || sweep.length_max_km < sweep.length_min_km ||
        sweep.length_step_km <= 0.0) {
      throw ConfigError("compare_sweep: invalid length sweep range");
    }
    for (double l = sweep.length_min_km; l <= sweep.length_max_km + 1e-9;
         l += sweep.length_step_km) {
      lengths.push_back(l);
    }
  }

  SweepResult result;
  for (const SchemeParams& base : schemes) {
    const auto emit = [&](SchemeParams row_params) {
      try {
        const double rate = scheme_rate(row_params, noise);
        result.rows.push_back(SweepRow{row_params.scheme, row_params.n,
                                       row_params.link.fiber_length_km,
                                       effective_eta(row_params.link), rate,
                                       noise.enabled});
      } catch (const ConfigError& err) {
        std::ostringstream msg;
        msg << scheme_name(row_params.scheme) << " N=" << row_params.n
            << " length=" << row_params.link.fiber_length_km << ": "
            << err.what();
        result.skipped.push_back(msg.str());
      }
    };

    if (sweep.variable == SweepVariable::Cores) {
      for (int n : cores) {
        SchemeParams row_params = base;
        row_params.n = n;
        emit(row_params);
      }
    } else {
      for (double l : lengths) {
        SchemeParams row_params = base;
        row_params.link.fiber_length_km = l;
        emit(row_params);
      }
    }
  }
  return result;
}

}  // namespace sdmqkd
