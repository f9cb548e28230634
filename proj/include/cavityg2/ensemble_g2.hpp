#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "cavityg2/correlation_curves.hpp"

namespace cavityg2 {

// Curves passed to compose/fit do not share a tau grid, or a needed sample
// (e.g. tau = 0) is missing from the grid.
struct GridMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fewer than three distinct atom numbers supplied to the scaling fit.
struct Underdetermined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Measured value incompatible with the model (e.g. g2(1us) <= 1 during
// atom-number calibration).
struct OutOfModel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transit-time decay envelope f(tau) = exp(-(|tau|/tau_i)^exponent).
struct EnvelopeParams {
  double tau_i_s = 7.1e-6;
  double exponent = 1.3;
};

double envelope(const EnvelopeParams& env, double tau_s);

struct ComposedG2 {
  std::vector<double> tau_s;
  std::vector<double> g2;
  double nbar_atoms = 0.0;
};

// Free-flow ensemble intensity correlation for a mean of nbar independent
// emitters with Poisson number statistics:
//   g2(tau) = 1 + |f(tau) g1(tau)|^2 + f(tau) g2_single(tau) / nbar.
// Defined for tau >= 0 and extended to negative lags by symmetry when asked.
ComposedG2 compose_g2(const CorrelationCurve& g1, const CorrelationCurve& g2_single,
                      double nbar_atoms, const EnvelopeParams& env);

enum class Classification { Antibunched, Bunched, Flat };
const char* to_string(Classification c);

// Compares g2 at the smallest-|tau| sample against the rest of the curve.
// Antibunched: below the maximum elsewhere beyond tolerance. Bunched: above
// every other sample beyond tolerance. Tolerance is 3 sigma (combined in
// quadrature) when uncertainties are given, otherwise 1e-6.
Classification classify(const std::vector<double>& tau_s, const std::vector<double>& g2,
                        const std::vector<double>* sigma = nullptr);

struct ScalingFit {
  double offset = 0.0;  // value at nbar -> infinity
  double slope = 0.0;   // coefficient of 1/nbar
  double residual_rms = 0.0;
  int n_points = 0;
};

// Weighted least squares of g2 = offset + slope/nbar. Weights 1/sigma^2 when
// sigma is given (must match length), otherwise uniform. Requires at least
// three distinct nbar values (Underdetermined otherwise).
ScalingFit fit_hyperbolic(const std::vector<double>& nbar, const std::vector<double>& g2,
                          const std::vector<double>* sigma = nullptr);

// Photon-number Fano factor of the collective emission:
// F = n_bar_photons * (g2(0) - 1) + 1.
double fano_factor(double nbar_photons, double g2_zero);

// Mean atom number from the measured correlation at 1 us:
// nbar = f(1us) / (g2(1us) - 1). Throws OutOfModel if g2(1us) <= 1.
double calibrate_atom_number(double g2_at_1us, const EnvelopeParams& env);

}  // namespace cavityg2
