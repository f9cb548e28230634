#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavityg2/click_sim.hpp"
#include "cavityg2/ensemble_g2.hpp"
#include "cavityg2/system_params.hpp"

namespace cavityg2 {

// Malformed config text, unknown key, or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One run description shared by all CLI subcommands. Fields keep the units
// used in the file (frequencies in MHz, times in microseconds); the accessor
// methods convert to the rad/s and seconds structs the library wants.
//
// File format is a small INI dialect: [section] headers, key = value lines,
// blank lines and #/; comments ignored, keys unique per section. Unknown
// sections or keys are errors. emit_run_config() writes every field, and the
// result parses back to an equal RunConfig.
struct RunConfig {
  // [system]
  double g_max_mhz = 2.5;
  double kappa_mhz = 1.25;
  double gamma_mhz = 3.0;
  double pump_rabi_mhz = 7.6;
  double recycle_rabi_mhz = 3.3;
  double detuning_mhz = -20.0;
  double g_eff_mhz = 2.5;
  double branch_u = 5.0 / 9.0;
  double eta_out = 0.90;
  double eta_det = 0.50;
  int n_max = 4;

  // [transit]
  double nbar_atoms = 2.0;
  double transit_us = 20.0;
  double window_us = 8000.0;
  int n_windows = 500;
  EnvelopeShape shape = EnvelopeShape::Gaussian;

  // [simulation]
  SimMode mode = SimMode::Combined;
  std::uint64_t seed = 1;
  double dead_time_us = 0.0;
  double dark_rate_hz = 0.0;
  double max_expected_clicks = 1e6;

  // [correlation]
  double bin_us = 0.05;
  double tau_max_us = 4.0;
  double model_tau_max_us = 4.0;
  double model_step_us = 0.01;

  // [ensemble]
  double envelope_tau_i_us = 7.1;
  double envelope_exponent = 1.3;

  // [sweep]
  std::vector<double> sweep_nbar = {0.5, 2.0, 10.0};

  bool operator==(const RunConfig&) const = default;

  SystemParams system_params() const;
  TransitConfig transit_config() const;
  DetectionConfig detection_config() const;
  EnvelopeParams envelope_params() const;

  // Validates the derived structs plus the correlation/sweep fields.
  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string emit_run_config(const RunConfig& cfg);

}  // namespace cavityg2
