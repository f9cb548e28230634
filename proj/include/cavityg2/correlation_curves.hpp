#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavityg2/master_equation.hpp"

namespace cavityg2 {

// Steady intensity is too small to normalize correlation functions.
struct ZeroIntensity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |g1| never reaches 1/e on the given grid.
struct NoDecay : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorrelationCurve {
  enum class Kind { Field, Intensity };
  Kind kind = Kind::Field;
  std::vector<double> tau_s;
  std::vector<Complex> value;   // Intensity curves carry zero imaginary part
  double normalization = 0.0;   // n_bar for Field, n_bar^2 for Intensity

  std::size_t size() const { return tau_s.size(); }
  double real_at(std::size_t i) const { return value[i].real(); }
  double abs_at(std::size_t i) const { return std::abs(value[i]); }
};

// Normalized field correlation of the emitted light by the regression rule:
// g1(tau) = Tr[a^dag exp(L tau)(a rho_ss)] / n_bar, n_bar = Tr[a^dag a rho_ss].
// Throws ZeroIntensity if n_bar < 1e-12. g1(0) = 1 by construction.
CorrelationCurve g1_atom(const LindbladGenerator& gen, const Matrix& rho_ss,
                         const std::vector<double>& tau_grid);

// Normalized intensity correlation:
// g2(tau) = Tr[a^dag a exp(L tau)(a rho_ss a^dag)] / n_bar^2. Real, >= 0.
CorrelationCurve g2_atom(const LindbladGenerator& gen, const Matrix& rho_ss,
                         const std::vector<double>& tau_grid);

// Smallest tau with |g1| <= 1/e, linearly interpolated between grid points.
// Throws NoDecay if the curve never crosses.
double coherence_time(const CorrelationCurve& g1);

struct EmissionRates {
  double photon_flux;          // photons/s leaving the cavity: 2*kappa*n_bar
  double detected_per_channel; // after eta_out, 50/50 split, eta_det
};

EmissionRates emission_rate(const SystemParams& p, const Matrix& rho_ss);

// Uniform grid helper: 0, step, ..., span (inclusive within half a step).
std::vector<double> make_tau_grid(double span_s, double step_s);

// CSV export: "tau_s,re,im" for field curves, "tau_s,value" for intensity.
void write_curve_csv(const std::string& path, const CorrelationCurve& curve);

}  // namespace cavityg2
