#include "cavityg2/ensemble_g2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace cavityg2 {

double envelope(const EnvelopeParams& env, double tau_s) {
  if (!(env.tau_i_s > 0.0) || !(env.exponent > 0.0))
    throw std::invalid_argument("envelope: tau_i and exponent must be > 0");
  if (tau_s == 0.0) return 1.0;
  return std::exp(-std::pow(std::abs(tau_s) / env.tau_i_s, env.exponent));
}

ComposedG2 compose_g2(const CorrelationCurve& g1, const CorrelationCurve& g2_single,
                      double nbar_atoms, const EnvelopeParams& env) {
  if (!(nbar_atoms > 0.0))
    throw std::invalid_argument("compose_g2: nbar_atoms must be > 0");
  if (g1.kind != CorrelationCurve::Kind::Field ||
      g2_single.kind != CorrelationCurve::Kind::Intensity)
    throw GridMismatch("compose_g2: expected one field and one intensity curve");
  if (g1.tau_s != g2_single.tau_s)
    throw GridMismatch("compose_g2: curves live on different tau grids");

  ComposedG2 out;
  out.tau_s = g1.tau_s;
  out.nbar_atoms = nbar_atoms;
  out.g2.reserve(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double f = envelope(env, g1.tau_s[i]);
    const double beat = std::norm(f * g1.value[i]);
    out.g2.push_back(1.0 + beat + f * g2_single.real_at(i) / nbar_atoms);
  }
  return out;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Antibunched: return "antibunched";
    case Classification::Bunched: return "bunched";
    default: return "flat";
  }
}

Classification classify(const std::vector<double>& tau_s, const std::vector<double>& g2,
                        const std::vector<double>* sigma) {
  if (tau_s.size() != g2.size() || g2.size() < 2)
    throw GridMismatch("classify: need matching tau/g2 with at least two samples");
  if (sigma && sigma->size() != g2.size())
    throw GridMismatch("classify: sigma length mismatch");

  std::size_t i0 = 0;
  for (std::size_t i = 1; i < tau_s.size(); ++i)
    if (std::abs(tau_s[i]) < std::abs(tau_s[i0])) i0 = i;

  double peak = -std::numeric_limits<double>::infinity();
  std::size_t ipeak = i0;
  for (std::size_t i = 0; i < g2.size(); ++i) {
    if (i == i0) continue;
    if (g2[i] > peak) {
      peak = g2[i];
      ipeak = i;
    }
  }
  double tol = 1e-6;
  if (sigma) {
    const double s0 = (*sigma)[i0];
    const double sp = (*sigma)[ipeak];
    tol = 3.0 * std::sqrt(s0 * s0 + sp * sp);
  }
  if (g2[i0] < peak - tol) return Classification::Antibunched;
  if (g2[i0] > peak + tol) return Classification::Bunched;
  return Classification::Flat;
}

ScalingFit fit_hyperbolic(const std::vector<double>& nbar, const std::vector<double>& g2,
                          const std::vector<double>* sigma) {
  if (nbar.size() != g2.size())
    throw GridMismatch("fit_hyperbolic: nbar/g2 length mismatch");
  if (sigma && sigma->size() != g2.size())
    throw GridMismatch("fit_hyperbolic: sigma length mismatch");
  std::set<double> distinct(nbar.begin(), nbar.end());
  if (distinct.size() < 3)
    throw Underdetermined("fit_hyperbolic: need at least three distinct nbar values");

  // Weighted normal equations for y = offset + slope * x, x = 1/nbar.
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < nbar.size(); ++i) {
    if (!(nbar[i] > 0.0))
      throw std::invalid_argument("fit_hyperbolic: nbar values must be > 0");
    const double x = 1.0 / nbar[i];
    double w = 1.0;
    if (sigma) {
      const double s = (*sigma)[i];
      if (!(s > 0.0)) throw std::invalid_argument("fit_hyperbolic: sigma must be > 0");
      w = 1.0 / (s * s);
    }
    sw += w;
    sx += w * x;
    sy += w * g2[i];
    sxx += w * x * x;
    sxy += w * x * g2[i];
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 1e-12 * sw * sxx))
    throw Underdetermined("fit_hyperbolic: singular normal equations");

  ScalingFit fit;
  fit.offset = (sxx * sy - sx * sxy) / det;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.n_points = static_cast<int>(nbar.size());
  double ss = 0;
  for (std::size_t i = 0; i < nbar.size(); ++i) {
    const double r = g2[i] - (fit.offset + fit.slope / nbar[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(nbar.size()));
  return fit;
}

double fano_factor(double nbar_photons, double g2_zero) {
  if (!(nbar_photons >= 0.0))
    throw std::invalid_argument("fano_factor: nbar_photons must be >= 0");
  return nbar_photons * (g2_zero - 1.0) + 1.0;
}

double calibrate_atom_number(double g2_at_1us, const EnvelopeParams& env) {
  if (!(g2_at_1us > 1.0))
    throw OutOfModel("calibrate_atom_number: g2(1us) must exceed 1");
  return envelope(env, 1e-6) / (g2_at_1us - 1.0);
}

}  // namespace cavityg2
