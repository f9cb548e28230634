#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>

#include "cavityg2/run_config.hpp"
#include "cavityg2/system_params.hpp"

using namespace cavityg2;

namespace {

// Every parse error carries the 1-based line it came from.
void check_fails_at(const std::string& text, int line, const char* fragment) {
  try {
    parse_run_config(text);
    FAIL_CHECK("no error for: " << text);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    const std::string prefix = "config line " + std::to_string(line) + ":";
    CHECK_MESSAGE(what.find(prefix) == 0, what << " (wanted " << prefix << ")");
    CHECK_MESSAGE(what.find(fragment) != std::string::npos,
                  what << " (wanted '" << fragment << "')");
  }
}

}  // namespace

TEST_CASE("empty text parses to the defaults") {
  CHECK(parse_run_config("") == RunConfig{});
  CHECK(parse_run_config("\n# only a comment\n\n") == RunConfig{});
}

TEST_CASE("emit and parse are inverse") {
  CHECK(parse_run_config(emit_run_config(RunConfig{})) == RunConfig{});

  RunConfig cfg;
  cfg.g_max_mhz = 1.75;
  cfg.kappa_mhz = 0.625;
  cfg.detuning_mhz = -31.25;
  cfg.branch_u = 0.25;
  cfg.n_max = 7;
  cfg.nbar_atoms = 0.15;
  cfg.transit_us = 19.5;
  cfg.window_us = 1000.0;
  cfg.n_windows = 42;
  cfg.shape = EnvelopeShape::Rectangular;
  cfg.mode = SimMode::Particle;
  cfg.seed = 18446744073709551615ull;
  cfg.dead_time_us = 0.045;
  cfg.dark_rate_hz = 230.0;
  cfg.max_expected_clicks = 5e4;
  cfg.bin_us = 0.025;
  cfg.tau_max_us = 2.5;
  cfg.model_tau_max_us = 6.0;
  cfg.model_step_us = 0.005;
  cfg.envelope_tau_i_us = 0.33;
  cfg.envelope_exponent = 1.0;
  cfg.sweep_nbar = {0.15, 1.0 / 3.0, 2.0, 50.0};
  CHECK(parse_run_config(emit_run_config(cfg)) == cfg);

  cfg.mode = SimMode::Wave;
  cfg.shape = EnvelopeShape::Gaussian;
  cfg.sweep_nbar.clear();
  CHECK(parse_run_config(emit_run_config(cfg)) == cfg);
}

TEST_CASE("comments, spacing, and section reopenings are tolerated") {
  const std::string text =
      "  # leading comment\n"
      "[system]\n"
      "kappa_mhz=2.5   ; inline comment\n"
      "\n"
      "[sweep]\n"
      "nbar_list = 1 , 2,3  # trailing\n"
      "[system]\n"
      "   n_max   =   6\n"
      ";[transit] commented out entirely\n";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.kappa_mhz == 2.5);
  CHECK(cfg.n_max == 6);
  CHECK(cfg.sweep_nbar == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(cfg.nbar_atoms == RunConfig{}.nbar_atoms);
}

TEST_CASE("an empty nbar_list clears the sweep") {
  const RunConfig cfg = parse_run_config("[sweep]\nnbar_list =\n");
  CHECK(cfg.sweep_nbar.empty());
}

TEST_CASE("malformed text is rejected with the offending line") {
  check_fails_at("kappa_mhz = 2\n", 1, "key before any [section]");
  check_fails_at("\n[system\n", 2, "unterminated section");
  check_fails_at("[lasers]\n", 1, "unknown section");
  check_fails_at("[system]\nkappa = 2\n", 2, "unknown key");
  check_fails_at("[transit]\nmode = wave\n", 2, "unknown key");
  check_fails_at("[system]\nkappa_mhz = 1\n\nkappa_mhz = 2\n", 4, "duplicate key");
  check_fails_at("[system]\nkappa_mhz 2\n", 2, "expected 'key = value'");
  check_fails_at("[system]\n = 2\n", 2, "empty key");
  check_fails_at("[system]\nkappa_mhz = fast\n", 2, "expected a number");
  check_fails_at("[system]\nkappa_mhz = 1e999\n", 2, "expected a number");
  check_fails_at("[system]\nkappa_mhz = 2MHz\n", 2, "expected a number");
  check_fails_at("[system]\nn_max = 4.5\n", 2, "expected an integer");
  check_fails_at("[simulation]\nseed = -1\n", 2, "non-negative");
  check_fails_at("[simulation]\nmode = hybrid\n", 2, "mode must be");
  check_fails_at("[transit]\nenvelope = triangular\n", 2, "envelope must be");
  check_fails_at("[sweep]\nnbar_list = 1,,2\n", 2, "empty entry");
}

TEST_CASE("reopening a section does not reset duplicate detection") {
  const std::string text =
      "[system]\nkappa_mhz = 1\n[transit]\nnbar_atoms = 1\n[system]\nkappa_mhz = 2\n";
  check_fails_at(text, 6, "duplicate key");
}

TEST_CASE("accessors convert file units to library units") {
  RunConfig cfg;
  cfg.kappa_mhz = 1.25;
  cfg.detuning_mhz = -20.0;
  cfg.transit_us = 20.0;
  cfg.window_us = 8000.0;
  cfg.dead_time_us = 0.05;
  cfg.envelope_tau_i_us = 7.1;

  const SystemParams p = cfg.system_params();
  CHECK(p.kappa == doctest::Approx(mhz_to_rad(1.25)).epsilon(1e-15));
  CHECK(p.delta == doctest::Approx(mhz_to_rad(-20.0)).epsilon(1e-15));
  CHECK(p.n_max == cfg.n_max);
  CHECK(p.branch_u == cfg.branch_u);

  const TransitConfig t = cfg.transit_config();
  CHECK(t.transit_s == doctest::Approx(20e-6).epsilon(1e-15));
  CHECK(t.window_s == doctest::Approx(8e-3).epsilon(1e-15));
  CHECK(t.nbar_atoms == cfg.nbar_atoms);
  CHECK(t.shape == cfg.shape);

  const DetectionConfig d = cfg.detection_config();
  CHECK(d.eta_out == cfg.eta_out);
  CHECK(d.eta_det == cfg.eta_det);
  CHECK(d.dead_time_s == doctest::Approx(5e-8).epsilon(1e-15));
  CHECK(d.max_expected_clicks == cfg.max_expected_clicks);

  const EnvelopeParams e = cfg.envelope_params();
  CHECK(e.tau_i_s == doctest::Approx(7.1e-6).epsilon(1e-15));
  CHECK(e.exponent == cfg.envelope_exponent);
}

TEST_CASE("validate checks its own fields and the derived structs") {
  CHECK_NOTHROW(RunConfig{}.validate());

  auto with = [](auto&& mutate) {
    RunConfig cfg;
    mutate(cfg);
    return cfg;
  };

  // delegated to the physics / simulation structs
  CHECK_THROWS_AS(with([](RunConfig& c) { c.kappa_mhz = 0.0; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.n_max = 1; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.window_us = c.transit_us; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.eta_det = 1.5; }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.dark_rate_hz = -1.0; }).validate(),
                  std::invalid_argument);

  // checked here directly
  CHECK_THROWS_AS(with([](RunConfig& c) { c.bin_us = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.tau_max_us = c.bin_us / 2; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.model_step_us = -0.01; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.model_tau_max_us = 0.001; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.envelope_tau_i_us = 0.0; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.envelope_exponent = 0.0; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.sweep_nbar = {1.0, 0.0}; }).validate(),
                  ConfigError);
  CHECK_THROWS_AS(with([](RunConfig& c) { c.sweep_nbar = {-2.0}; }).validate(),
                  ConfigError);
}

TEST_CASE("load reads a file and reports a missing one") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cavityg2_cfg_test";
  fs::create_directories(dir);
  const fs::path path = dir / "run.ini";

  RunConfig cfg;
  cfg.seed = 77;
  cfg.mode = SimMode::Wave;
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    const std::string text = emit_run_config(cfg);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
  }
  CHECK(load_run_config(path.string()) == cfg);
  CHECK_THROWS(load_run_config((dir / "absent.ini").string()));
  fs::remove_all(dir);
}
