#include "cavityg2/run_config.hpp"

#include <cctype>
#include <cerrno>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string_view>

#include "cavityg2/io_util.hpp"

namespace cavityg2 {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    fail(line, "expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& v, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE || x < INT_MIN || x > INT_MAX)
    fail(line, "expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& v, std::size_t line) {
  if (!v.empty() && v[0] == '-') fail(line, "expected a non-negative integer, got '" + v + "'");
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    fail(line, "expected a non-negative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

std::vector<double> to_list(const std::string& v, std::size_t line) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss{v};
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    const std::string t = trim(piece);
    if (t.empty()) fail(line, "empty entry in list '" + v + "'");
    out.push_back(to_double(t, line));
  }
  return out;
}

SimMode to_mode(const std::string& v, std::size_t line) {
  if (v == "particle") return SimMode::Particle;
  if (v == "wave") return SimMode::Wave;
  if (v == "combined") return SimMode::Combined;
  fail(line, "mode must be particle, wave, or combined (got '" + v + "')");
}

EnvelopeShape to_shape(const std::string& v, std::size_t line) {
  if (v == "gaussian") return EnvelopeShape::Gaussian;
  if (v == "rectangular") return EnvelopeShape::Rectangular;
  fail(line, "envelope must be gaussian or rectangular (got '" + v + "')");
}

void append(std::string& out, const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += key;
  out += " = ";
  out += buf;
  out += '\n';
}

void append(std::string& out, const char* key, int v) {
  out += key;
  out += " = ";
  out += std::to_string(v);
  out += '\n';
}

void append(std::string& out, const char* key, std::uint64_t v) {
  out += key;
  out += " = ";
  out += std::to_string(v);
  out += '\n';
}

void append(std::string& out, const char* key, const char* v) {
  out += key;
  out += " = ";
  out += v;
  out += '\n';
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in{text};
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const std::size_t cut = raw.find_first_of("#;");
    if (cut != std::string::npos) raw.erase(cut);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(n, "unterminated section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "system" && section != "transit" && section != "simulation" &&
          section != "correlation" && section != "ensemble" && section != "sweep")
        fail(n, "unknown section [" + section + "]");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(n, "expected 'key = value', got '" + line + "'");
    if (section.empty()) fail(n, "key before any [section]");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string val = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) fail(n, "empty key");
    if (!seen.insert(section + "." + key).second)
      fail(n, "duplicate key '" + key + "' in [" + section + "]");

    bool known = true;
    if (section == "system") {
      if (key == "g_max_mhz") cfg.g_max_mhz = to_double(val, n);
      else if (key == "kappa_mhz") cfg.kappa_mhz = to_double(val, n);
      else if (key == "gamma_mhz") cfg.gamma_mhz = to_double(val, n);
      else if (key == "pump_rabi_mhz") cfg.pump_rabi_mhz = to_double(val, n);
      else if (key == "recycle_rabi_mhz") cfg.recycle_rabi_mhz = to_double(val, n);
      else if (key == "detuning_mhz") cfg.detuning_mhz = to_double(val, n);
      else if (key == "g_eff_mhz") cfg.g_eff_mhz = to_double(val, n);
      else if (key == "branch_u") cfg.branch_u = to_double(val, n);
      else if (key == "eta_out") cfg.eta_out = to_double(val, n);
      else if (key == "eta_det") cfg.eta_det = to_double(val, n);
      else if (key == "n_max") cfg.n_max = to_int(val, n);
      else known = false;
    } else if (section == "transit") {
      if (key == "nbar_atoms") cfg.nbar_atoms = to_double(val, n);
      else if (key == "transit_us") cfg.transit_us = to_double(val, n);
      else if (key == "window_us") cfg.window_us = to_double(val, n);
      else if (key == "n_windows") cfg.n_windows = to_int(val, n);
      else if (key == "envelope") cfg.shape = to_shape(val, n);
      else known = false;
    } else if (section == "simulation") {
      if (key == "mode") cfg.mode = to_mode(val, n);
      else if (key == "seed") cfg.seed = to_u64(val, n);
      else if (key == "dead_time_us") cfg.dead_time_us = to_double(val, n);
      else if (key == "dark_rate_hz") cfg.dark_rate_hz = to_double(val, n);
      else if (key == "max_expected_clicks") cfg.max_expected_clicks = to_double(val, n);
      else known = false;
    } else if (section == "correlation") {
      if (key == "bin_us") cfg.bin_us = to_double(val, n);
      else if (key == "tau_max_us") cfg.tau_max_us = to_double(val, n);
      else if (key == "model_tau_max_us") cfg.model_tau_max_us = to_double(val, n);
      else if (key == "model_step_us") cfg.model_step_us = to_double(val, n);
      else known = false;
    } else if (section == "ensemble") {
      if (key == "tau_i_us") cfg.envelope_tau_i_us = to_double(val, n);
      else if (key == "exponent") cfg.envelope_exponent = to_double(val, n);
      else known = false;
    } else {  // sweep
      if (key == "nbar_list") cfg.sweep_nbar = to_list(val, n);
      else known = false;
    }
    if (!known) fail(n, "unknown key '" + key + "' in [" + section + "]");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text(path));
}

std::string emit_run_config(const RunConfig& cfg) {
  std::string out;
  out += "[system]\n";
  append(out, "g_max_mhz", cfg.g_max_mhz);
  append(out, "kappa_mhz", cfg.kappa_mhz);
  append(out, "gamma_mhz", cfg.gamma_mhz);
  append(out, "pump_rabi_mhz", cfg.pump_rabi_mhz);
  append(out, "recycle_rabi_mhz", cfg.recycle_rabi_mhz);
  append(out, "detuning_mhz", cfg.detuning_mhz);
  append(out, "g_eff_mhz", cfg.g_eff_mhz);
  append(out, "branch_u", cfg.branch_u);
  append(out, "eta_out", cfg.eta_out);
  append(out, "eta_det", cfg.eta_det);
  append(out, "n_max", cfg.n_max);
  out += "\n[transit]\n";
  append(out, "nbar_atoms", cfg.nbar_atoms);
  append(out, "transit_us", cfg.transit_us);
  append(out, "window_us", cfg.window_us);
  append(out, "n_windows", cfg.n_windows);
  append(out, "envelope", to_string(cfg.shape));
  out += "\n[simulation]\n";
  append(out, "mode", to_string(cfg.mode));
  append(out, "seed", cfg.seed);
  append(out, "dead_time_us", cfg.dead_time_us);
  append(out, "dark_rate_hz", cfg.dark_rate_hz);
  append(out, "max_expected_clicks", cfg.max_expected_clicks);
  out += "\n[correlation]\n";
  append(out, "bin_us", cfg.bin_us);
  append(out, "tau_max_us", cfg.tau_max_us);
  append(out, "model_tau_max_us", cfg.model_tau_max_us);
  append(out, "model_step_us", cfg.model_step_us);
  out += "\n[ensemble]\n";
  append(out, "tau_i_us", cfg.envelope_tau_i_us);
  append(out, "exponent", cfg.envelope_exponent);
  out += "\n[sweep]\n";
  std::string list;
  for (double v : cfg.sweep_nbar) {
    if (!list.empty()) list += ", ";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    list += buf;
  }
  append(out, "nbar_list", list.c_str());
  return out;
}

SystemParams RunConfig::system_params() const {
  SystemParams p;
  p.g_max = mhz_to_rad(g_max_mhz);
  p.kappa = mhz_to_rad(kappa_mhz);
  p.gamma = mhz_to_rad(gamma_mhz);
  p.omega_p = mhz_to_rad(pump_rabi_mhz);
  p.omega_r = mhz_to_rad(recycle_rabi_mhz);
  p.delta = mhz_to_rad(detuning_mhz);
  p.g_eff = mhz_to_rad(g_eff_mhz);
  p.branch_u = branch_u;
  p.eta_out = eta_out;
  p.eta_det = eta_det;
  p.n_max = n_max;
  return p;
}

TransitConfig RunConfig::transit_config() const {
  TransitConfig t;
  t.nbar_atoms = nbar_atoms;
  t.transit_s = transit_us * 1e-6;
  t.window_s = window_us * 1e-6;
  t.n_windows = n_windows;
  t.shape = shape;
  return t;
}

DetectionConfig RunConfig::detection_config() const {
  DetectionConfig d;
  d.eta_out = eta_out;
  d.eta_det = eta_det;
  d.dead_time_s = dead_time_us * 1e-6;
  d.dark_rate_hz = dark_rate_hz;
  d.max_expected_clicks = max_expected_clicks;
  return d;
}

EnvelopeParams RunConfig::envelope_params() const {
  EnvelopeParams e;
  e.tau_i_s = envelope_tau_i_us * 1e-6;
  e.exponent = envelope_exponent;
  return e;
}

void RunConfig::validate() const {
  system_params().validate();
  transit_config().validate();
  detection_config().validate();
  auto bad = [](const char* msg) { throw ConfigError(msg); };
  if (!(bin_us > 0.0)) bad("config: bin_us must be > 0");
  if (!(tau_max_us >= bin_us)) bad("config: tau_max_us must be >= bin_us");
  if (!(model_step_us > 0.0)) bad("config: model_step_us must be > 0");
  if (!(model_tau_max_us >= model_step_us)) bad("config: model_tau_max_us must be >= model_step_us");
  if (!(envelope_tau_i_us > 0.0)) bad("config: tau_i_us must be > 0");
  if (!(envelope_exponent > 0.0)) bad("config: exponent must be > 0");
  for (double v : sweep_nbar)
    if (!(v > 0.0)) bad("config: nbar_list entries must be > 0");
}

}  // namespace cavityg2
