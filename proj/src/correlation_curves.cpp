#include "cavityg2/correlation_curves.hpp"

#include <cmath>
#include <cstdio>

#include "cavityg2/io_util.hpp"

namespace cavityg2 {

namespace {

double mean_photon_number(const Matrix& rho_ss, const Matrix& a) {
  // Same operation order as the curve evaluation at tau = 0, so the
  // normalized value there is exactly 1.
  const Matrix seeded = a * rho_ss;
  const double n_bar = (a.adjoint() * seeded).trace().real();
  if (n_bar < 1e-12)
    throw ZeroIntensity("correlation curves: steady photon number below 1e-12");
  return n_bar;
}

}  // namespace

CorrelationCurve g1_atom(const LindbladGenerator& gen, const Matrix& rho_ss,
                         const std::vector<double>& tau_grid) {
  const int n_max = gen.dim() / 3 - 1;
  const Matrix a = annihilator(n_max);
  const Matrix ad = a.adjoint();
  const double n_bar = mean_photon_number(rho_ss, a);

  CorrelationCurve curve;
  curve.kind = CorrelationCurve::Kind::Field;
  curve.tau_s = tau_grid;
  curve.normalization = n_bar;
  const std::vector<Matrix> propagated = evolve(gen, a * rho_ss, tau_grid);
  curve.value.reserve(propagated.size());
  for (const Matrix& m : propagated) curve.value.push_back((ad * m).trace() / n_bar);
  return curve;
}

CorrelationCurve g2_atom(const LindbladGenerator& gen, const Matrix& rho_ss,
                         const std::vector<double>& tau_grid) {
  const int n_max = gen.dim() / 3 - 1;
  const Matrix a = annihilator(n_max);
  const Matrix num = a.adjoint() * a;
  const double n_bar = mean_photon_number(rho_ss, a);

  CorrelationCurve curve;
  curve.kind = CorrelationCurve::Kind::Intensity;
  curve.tau_s = tau_grid;
  curve.normalization = n_bar * n_bar;
  const Matrix seeded = a * rho_ss * a.adjoint();
  const std::vector<Matrix> propagated = evolve(gen, seeded, tau_grid);
  curve.value.reserve(propagated.size());
  for (const Matrix& m : propagated) {
    const Complex raw = (num * m).trace() / (n_bar * n_bar);
    if (std::abs(raw.imag()) > 1e-6 || raw.real() < -1e-6)
      throw std::runtime_error("g2_atom: intensity correlation not real nonnegative");
    curve.value.emplace_back(std::max(raw.real(), 0.0), 0.0);
  }
  return curve;
}

double coherence_time(const CorrelationCurve& g1) {
  const double level = std::exp(-1.0);
  if (g1.size() == 0) throw NoDecay("coherence_time: empty curve");
  double prev = g1.abs_at(0);
  if (prev <= level) return g1.tau_s[0];
  for (std::size_t i = 1; i < g1.size(); ++i) {
    const double cur = g1.abs_at(i);
    if (cur <= level) {
      const double f = (prev - level) / (prev - cur);
      return g1.tau_s[i - 1] + f * (g1.tau_s[i] - g1.tau_s[i - 1]);
    }
    prev = cur;
  }
  throw NoDecay("coherence_time: |g1| stays above 1/e on the grid");
}

EmissionRates emission_rate(const SystemParams& p, const Matrix& rho_ss) {
  const Matrix num = number_op(p.n_max);
  const double n_bar = (num * rho_ss).trace().real();
  EmissionRates r;
  r.photon_flux = 2.0 * p.kappa * n_bar;
  r.detected_per_channel = r.photon_flux * p.eta_out * 0.5 * p.eta_det;
  return r;
}

std::vector<double> make_tau_grid(double span_s, double step_s) {
  if (!(span_s > 0.0) || !(step_s > 0.0))
    throw std::invalid_argument("make_tau_grid: span and step must be > 0");
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor(span_s / step_s + 0.5));
  grid.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * step_s);
  return grid;
}

void write_curve_csv(const std::string& path, const CorrelationCurve& curve) {
  std::string text;
  char line[128];
  if (curve.kind == CorrelationCurve::Kind::Field) {
    text += "tau_s,re,im\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", curve.tau_s[i],
                    curve.value[i].real(), curve.value[i].imag());
      text += line;
    }
  } else {
    text += "tau_s,value\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      std::snprintf(line, sizeof line, "%.17g,%.17g\n", curve.tau_s[i], curve.real_at(i));
      text += line;
    }
  }
  write_text_atomic(path, text);
}

}  // namespace cavityg2
