#include "cavityg2/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "cavityg2/click_sim.hpp"
#include "cavityg2/click_stream.hpp"
#include "cavityg2/correlation_curves.hpp"
#include "cavityg2/correlator.hpp"
#include "cavityg2/ensemble_g2.hpp"
#include "cavityg2/io_util.hpp"
#include "cavityg2/master_equation.hpp"
#include "cavityg2/run_config.hpp"

namespace fs = std::filesystem;

namespace cavityg2 {

namespace {

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string out_path(const CommandContext& ctx, const std::string& name) {
  return (fs::path(ctx.out_dir) / name).string();
}

void prepare_out_dir(const CommandContext& ctx) {
  fs::create_directories(ctx.out_dir);
  write_text_atomic(out_path(ctx, "effective_config.ini"), emit_run_config(ctx.cfg));
}

void write_composed_csv(const std::string& path, const ComposedG2& c) {
  std::string text = "tau_s,g2\n";
  char buf[96];
  for (std::size_t i = 0; i < c.tau_s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", c.tau_s[i], c.g2[i]);
    text += buf;
  }
  write_text_atomic(path, text);
}

// Index of the grid point closest to tau = 1 us; the step must land on it.
std::size_t one_us_index(const std::vector<double>& tau_s) {
  for (std::size_t i = 0; i < tau_s.size(); ++i)
    if (std::abs(tau_s[i] - 1e-6) < 1e-12) return i;
  throw ConfigError("fit: model grid has no tau = 1 us sample "
                    "(model_tau_max_us must reach 1 and model_step_us must divide 1)");
}

}  // namespace

void cmd_model(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  cfg.validate();
  if (cfg.sweep_nbar.empty()) throw ConfigError("model: [sweep] nbar_list is empty");
  prepare_out_dir(ctx);

  const SystemParams p = cfg.system_params();
  const LindbladGenerator gen = build_lindblad(p);
  const Matrix rho = steady_state(gen);
  const auto grid = make_tau_grid(cfg.model_tau_max_us * 1e-6, cfg.model_step_us * 1e-6);
  const CorrelationCurve g1 = g1_atom(gen, rho, grid);
  const CorrelationCurve g2s = g2_atom(gen, rho, grid);
  write_curve_csv(out_path(ctx, "g1_atom.csv"), g1);
  write_curve_csv(out_path(ctx, "g2_atom.csv"), g2s);

  const EmissionRates rates = emission_rate(p, rho);
  std::printf("nbar_cavity = %.6g\n", rates.photon_flux / (2.0 * p.kappa));
  std::printf("photon_flux_hz = %.6g\n", rates.photon_flux);
  std::printf("detected_per_channel_hz = %.6g\n", rates.detected_per_channel);
  std::printf("g2_atom_zero = %.6g\n", g2s.real_at(0));
  std::printf("coherence_time_us = %.6g\n", coherence_time(g1) * 1e6);

  const EnvelopeParams env = cfg.envelope_params();
  for (double nb : cfg.sweep_nbar) {
    const ComposedG2 c = compose_g2(g1, g2s, nb, env);
    const std::string name = "g2_model_nbar" + fmt_g(nb) + ".csv";
    write_composed_csv(out_path(ctx, name), c);
    std::printf("nbar %s: g2(0) = %.4f, %s (%s)\n", fmt_g(nb).c_str(), c.g2.front(),
                to_string(classify(c.tau_s, c.g2)), name.c_str());
  }
}

void cmd_simulate(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  cfg.validate();
  prepare_out_dir(ctx);

  const EmitterModel em = make_emitter_model(cfg.system_params());
  const TransitConfig transit = cfg.transit_config();
  const DetectionConfig det = cfg.detection_config();
  const ClickStream s = simulate(em, cfg.mode, transit, det, cfg.seed,
                                 std::max(1, ctx.threads));
  write_stream(out_path(ctx, "clicks.pstm"), s);

  const double dur = s.total_duration();
  std::printf("mode = %s\n", to_string(cfg.mode));
  std::printf("windows = %zu\n", s.windows.size());
  std::printf("clicks_ch0 = %zu\n", s.t0.size());
  std::printf("clicks_ch1 = %zu\n", s.t1.size());
  std::printf("duration_s = %.6g\n", dur);
  if (dur > 0.0)
    std::printf("rate_per_channel_hz = %.6g\n",
                0.5 * static_cast<double>(s.total_clicks()) / dur);
  std::printf("predicted_rate_per_channel_hz = %.6g\n",
              predicted_channel_rate(em, transit, det));
  std::printf("stream = %s\n", out_path(ctx, "clicks.pstm").c_str());
}

void cmd_correlate(const CommandContext& ctx, const std::string& stream_path, bool naive) {
  const RunConfig& cfg = ctx.cfg;
  cfg.validate();
  prepare_out_dir(ctx);

  const ClickStream s = read_stream(stream_path, cfg.transit_config().window_s);
  const double bin_s = cfg.bin_us * 1e-6;
  const double tau_s = cfg.tau_max_us * 1e-6;
  const CorrelationHistogram h =
      naive ? naive_correlate(s, bin_s, tau_s) : cross_correlate(s, bin_s, tau_s);
  write_histogram_csv(out_path(ctx, "histogram.csv"), h);

  const long long pairs = std::accumulate(h.counts.begin(), h.counts.end(), 0LL);
  std::printf("windows = %zu\n", s.windows.size());
  std::printf("clicks_ch0 = %llu\n", static_cast<unsigned long long>(h.n1));
  std::printf("clicks_ch1 = %llu\n", static_cast<unsigned long long>(h.n2));
  std::printf("pairs = %lld\n", pairs);
  if (h.empty_channel) {
    std::printf("classification = undefined (one channel is empty)\n");
  } else if (h.n_side < 2) {
    std::printf("classification = undefined (single bin)\n");
  } else {
    // classified on the folded curve so the mirror of the zero-delay bin
    // cannot tie with it
    const CorrelationHistogram::Folded f = h.folded();
    std::printf("classification = %s\n", to_string(classify(f.tau_s, f.g2, &f.sigma)));
  }
  std::printf("histogram = %s\n", out_path(ctx, "histogram.csv").c_str());
}

void cmd_fit(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  cfg.validate();
  if (cfg.sweep_nbar.size() < 3)
    throw ConfigError("fit: need at least three entries in [sweep] nbar_list");
  prepare_out_dir(ctx);

  const SystemParams p = cfg.system_params();
  const LindbladGenerator gen = build_lindblad(p);
  const Matrix rho = steady_state(gen);
  const auto grid = make_tau_grid(cfg.model_tau_max_us * 1e-6, cfg.model_step_us * 1e-6);
  const CorrelationCurve g1 = g1_atom(gen, rho, grid);
  const CorrelationCurve g2s = g2_atom(gen, rho, grid);
  const std::size_t i1us = one_us_index(grid);
  const EnvelopeParams env = cfg.envelope_params();
  const double nbar_cavity = emission_rate(p, rho).photon_flux / (2.0 * p.kappa);

  std::vector<double> at0;
  std::vector<double> at1;
  std::vector<ComposedG2> curves;
  for (double nb : cfg.sweep_nbar) {
    curves.push_back(compose_g2(g1, g2s, nb, env));
    at0.push_back(curves.back().g2.front());
    at1.push_back(curves.back().g2[i1us]);
  }
  const ScalingFit f0 = fit_hyperbolic(cfg.sweep_nbar, at0);
  const ScalingFit f1 = fit_hyperbolic(cfg.sweep_nbar, at1);

  std::string report;
  char buf[128];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.10g\n", key, v);
    report += buf;
  };
  put("coherence_time_us", coherence_time(g1) * 1e6);
  put("nbar_cavity", nbar_cavity);
  put("tau0_offset", f0.offset);
  put("tau0_slope", f0.slope);
  put("tau0_residual_rms", f0.residual_rms);
  put("tau0_n_points", f0.n_points);
  put("tau1us_offset", f1.offset);
  put("tau1us_slope", f1.slope);
  put("tau1us_residual_rms", f1.residual_rms);
  put("tau1us_n_points", f1.n_points);
  for (std::size_t i = 0; i < cfg.sweep_nbar.size(); ++i) {
    const std::string nb = fmt_g(cfg.sweep_nbar[i]);
    put(("fano_nbar" + nb).c_str(), fano_factor(cfg.sweep_nbar[i] * nbar_cavity, at0[i]));
    put(("calibrated_nbar" + nb).c_str(), calibrate_atom_number(at1[i], env));
  }
  write_text_atomic(out_path(ctx, "fit_report.txt"), report);
  std::fputs(report.c_str(), stdout);
  std::printf("report = %s\n", out_path(ctx, "fit_report.txt").c_str());
}

}  // namespace cavityg2
