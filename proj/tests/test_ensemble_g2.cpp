#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cavityg2/ensemble_g2.hpp"

using namespace cavityg2;

namespace {

CorrelationCurve synthetic_field(std::vector<double> tau, std::vector<Complex> val) {
  CorrelationCurve c;
  c.kind = CorrelationCurve::Kind::Field;
  c.tau_s = std::move(tau);
  c.value = std::move(val);
  c.normalization = 1.0;
  return c;
}

CorrelationCurve synthetic_intensity(std::vector<double> tau, std::vector<double> val) {
  CorrelationCurve c;
  c.kind = CorrelationCurve::Kind::Intensity;
  c.tau_s = std::move(tau);
  for (double v : val) c.value.emplace_back(v, 0.0);
  c.normalization = 1.0;
  return c;
}

struct ModelCurves {
  SystemParams p;
  CorrelationCurve g1;
  CorrelationCurve g2;
};

const ModelCurves& model_curves() {
  static const ModelCurves m = [] {
    ModelCurves v{SystemParams::defaults(), {}, {}};
    const LindbladGenerator gen = build_lindblad(v.p);
    const Matrix rho = steady_state(gen);
    const auto grid = make_tau_grid(4e-6, 10e-9);
    v.g1 = g1_atom(gen, rho, grid);
    v.g2 = g2_atom(gen, rho, grid);
    return v;
  }();
  return m;
}

std::size_t index_of_tau(const std::vector<double>& tau, double t) {
  for (std::size_t i = 0; i < tau.size(); ++i)
    if (std::abs(tau[i] - t) < 1e-12) return i;
  REQUIRE(false);
  return 0;
}

}  // namespace

TEST_CASE("transit envelope has unit peak and the documented scale") {
  const EnvelopeParams env;
  CHECK(envelope(env, 0.0) == 1.0);
  CHECK(envelope(env, env.tau_i_s) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(envelope(env, 1e-6) == doctest::Approx(0.926).epsilon(2e-3));
  CHECK(envelope(env, -1e-6) == doctest::Approx(envelope(env, 1e-6)).epsilon(1e-15));
  double prev = 1.0;
  for (double t = 0.5e-6; t < 40e-6; t += 0.5e-6) {
    const double f = envelope(env, t);
    CHECK(f < prev);
    CHECK(f > 0.0);
    prev = f;
  }
  CHECK_THROWS_AS(envelope({0.0, 1.3}, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(envelope({7.1e-6, 0.0}, 1e-6), std::invalid_argument);
}

TEST_CASE("composition reproduces the three-term arithmetic at zero delay") {
  const auto g1 = synthetic_field({0.0}, {Complex(1.0, 0.0)});
  const auto g2a = synthetic_intensity({0.0}, {0.32});
  const ComposedG2 c = compose_g2(g1, g2a, 0.15, EnvelopeParams{});
  REQUIRE(c.g2.size() == 1);
  CHECK(c.g2[0] == doctest::Approx(1.0 + 1.0 + 0.32 / 0.15).epsilon(1e-12));
  CHECK(c.nbar_atoms == doctest::Approx(0.15));
}

TEST_CASE("composition limits: distant delays and large ensembles") {
  const std::vector<double> tau = {0.0, 1e-6, 50e-6};
  const auto g1 = synthetic_field(tau, {Complex(1, 0), Complex(0.5, 0.2), Complex(0.1, 0)});
  const auto g2a = synthetic_intensity(tau, {0.3, 0.9, 1.0});
  const EnvelopeParams env;

  SUBCASE("envelope kills both correlation terms at long delay") {
    const ComposedG2 c = compose_g2(g1, g2a, 1.0, env);
    CHECK(std::abs(c.g2.back() - 1.0) < 1e-4);
  }

  SUBCASE("infinite ensemble keeps only the interference term") {
    const ComposedG2 c = compose_g2(g1, g2a, 1e9, env);
    for (std::size_t i = 0; i < tau.size(); ++i) {
      const double f = envelope(env, tau[i]);
      const double expected = 1.0 + std::norm(f * g1.value[i]);
      CHECK(c.g2[i] == doctest::Approx(expected).epsilon(1e-8));
    }
    CHECK(c.g2[0] == doctest::Approx(2.0).epsilon(1e-8));
  }
}

TEST_CASE("composition rejects mismatched curves and empty ensembles") {
  const auto g1 = synthetic_field({0.0, 1e-6}, {Complex(1, 0), Complex(0.5, 0)});
  const auto g2a_short = synthetic_intensity({0.0}, {0.3});
  CHECK_THROWS_AS(compose_g2(g1, g2a_short, 1.0, EnvelopeParams{}), GridMismatch);
  const auto g2a = synthetic_intensity({0.0, 1e-6}, {0.3, 0.9});
  CHECK_THROWS_AS(compose_g2(g1, g2a, 0.0, EnvelopeParams{}), std::invalid_argument);
  // two field curves by mistake
  CHECK_THROWS_AS(compose_g2(g1, g1, 1.0, EnvelopeParams{}), GridMismatch);
}

TEST_CASE("classification separates the three canonical shapes") {
  const std::vector<double> tau = {0.0, 0.2e-6, 0.5e-6, 1e-6};

  SUBCASE("rising from a dip is antibunched") {
    CHECK(classify(tau, {0.4, 0.8, 0.95, 1.0}) == Classification::Antibunched);
  }
  SUBCASE("peaked at zero is bunched") {
    CHECK(classify(tau, {2.0, 1.5, 1.1, 1.0}) == Classification::Bunched);
  }
  SUBCASE("constant is flat") {
    CHECK(classify(tau, {1.0, 1.0, 1.0, 1.0}) == Classification::Flat);
  }
  SUBCASE("wiggles inside the stated uncertainty are flat") {
    const std::vector<double> g2 = {1.002, 0.999, 1.001, 1.0};
    const std::vector<double> sigma = {0.01, 0.01, 0.01, 0.01};
    CHECK(classify(tau, g2, &sigma) == Classification::Flat);
    CHECK(classify(tau, g2) == Classification::Bunched);
  }
  SUBCASE("names are printable") {
    CHECK(std::string(to_string(Classification::Antibunched)) == "antibunched");
    CHECK(std::string(to_string(Classification::Bunched)) == "bunched");
    CHECK(std::string(to_string(Classification::Flat)) == "flat");
  }
}

TEST_CASE("ensemble size drives the antibunching-to-bunching transition") {
  const auto& m = model_curves();
  const EnvelopeParams env;

  auto composed_class = [&](double nbar) {
    const ComposedG2 c = compose_g2(m.g1, m.g2, nbar, env);
    return classify(c.tau_s, c.g2);
  };
  CHECK(composed_class(0.15) == Classification::Antibunched);
  CHECK(composed_class(2.0) == Classification::Bunched);
  CHECK(composed_class(10.0) == Classification::Bunched);

  // single crossover, inside the expected window
  double last_antibunched = 0.0, first_bunched = 0.0;
  int flips = 0;
  Classification prev = composed_class(0.05);
  CHECK(prev == Classification::Antibunched);
  for (double nbar = 0.05 * std::pow(10.0, 0.1); nbar <= 50.0;
       nbar *= std::pow(10.0, 0.1)) {
    const Classification cur = composed_class(nbar);
    if (cur != prev) {
      ++flips;
      last_antibunched = nbar / std::pow(10.0, 0.1);
      first_bunched = nbar;
      prev = cur;
    }
  }
  CHECK(flips == 1);
  CHECK(prev == Classification::Bunched);
  CHECK(last_antibunched > 0.3);
  CHECK(first_bunched < 3.0);

  // zero-delay value falls monotonically with ensemble size
  double prev_zero = 1e30;
  for (double nbar : {0.15, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
    const ComposedG2 c = compose_g2(m.g1, m.g2, nbar, env);
    CHECK(c.g2[0] < prev_zero);
    prev_zero = c.g2[0];
  }
}

TEST_CASE("hyperbolic fit recovers exact generating coefficients") {
  const std::vector<double> nbar = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<double> g2;
  for (double n : nbar) g2.push_back(2.0 + 0.32 / n);

  SUBCASE("unweighted") {
    const ScalingFit fit = fit_hyperbolic(nbar, g2);
    CHECK(fit.offset == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.slope == doctest::Approx(0.32).epsilon(1e-10));
    CHECK(fit.residual_rms < 1e-10);
    CHECK(fit.n_points == 6);
  }
  SUBCASE("weights do not move an exact fit") {
    const std::vector<double> sigma = {0.1, 0.02, 0.3, 0.05, 0.2, 0.01};
    const ScalingFit fit = fit_hyperbolic(nbar, g2, &sigma);
    CHECK(fit.offset == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fit.slope == doctest::Approx(0.32).epsilon(1e-10));
  }
  SUBCASE("three distinct atom numbers are required") {
    CHECK_THROWS_AS(fit_hyperbolic({1.0, 2.0}, {2.3, 2.2}), Underdetermined);
    CHECK_THROWS_AS(fit_hyperbolic({1.0, 1.0, 1.0}, {2.3, 2.3, 2.3}), Underdetermined);
  }
}

TEST_CASE("refitting the composed model returns its own ingredients") {
  const auto& m = model_curves();
  const EnvelopeParams env;
  const std::vector<double> nbar = {0.5, 1.0, 2.0, 5.0, 10.0, 20.0};

  const std::size_t i0 = index_of_tau(m.g1.tau_s, 0.0);
  const std::size_t i1 = index_of_tau(m.g1.tau_s, 1e-6);

  std::vector<double> at0, at1;
  for (double n : nbar) {
    const ComposedG2 c = compose_g2(m.g1, m.g2, n, env);
    at0.push_back(c.g2[i0]);
    at1.push_back(c.g2[i1]);
  }

  const ScalingFit f0 = fit_hyperbolic(nbar, at0);
  CHECK(f0.offset == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f0.slope == doctest::Approx(m.g2.real_at(i0)).epsilon(1e-6));

  const ScalingFit f1 = fit_hyperbolic(nbar, at1);
  CHECK(f1.offset == doctest::Approx(1.0).epsilon(0.02));
  const double expected_slope = envelope(env, 1e-6) * m.g2.real_at(i1);
  CHECK(f1.slope == doctest::Approx(expected_slope).epsilon(1e-6));
}

TEST_CASE("Fano factor arithmetic") {
  CHECK(fano_factor(5.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fano_factor(0.0, 3.7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fano_factor(2.6, 1.3) == doctest::Approx(1.78).epsilon(1e-12));
  CHECK(fano_factor(1.0, 0.5) < 1.0);  // sub-Poissonian
}

TEST_CASE("atom-number calibration inverts the one-microsecond formula") {
  const EnvelopeParams env;
  const double f1us = envelope(env, 1e-6);
  CHECK(calibrate_atom_number(2.0, env) == doctest::Approx(f1us).epsilon(1e-12));
  CHECK(calibrate_atom_number(2.0, env) == doctest::Approx(0.926).epsilon(2e-3));
  CHECK(calibrate_atom_number(1.1, env) ==
        doctest::Approx(10.0 * f1us).epsilon(1e-9));
  CHECK(calibrate_atom_number(1.1, env) == doctest::Approx(9.26).epsilon(2e-3));
  CHECK_THROWS_AS(calibrate_atom_number(1.0, env), OutOfModel);
  CHECK_THROWS_AS(calibrate_atom_number(0.4, env), OutOfModel);
}
