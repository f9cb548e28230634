#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cavityg2/click_stream.hpp"
#include "cavityg2/correlation_curves.hpp"
#include "cavityg2/system_params.hpp"

namespace cavityg2 {

// Expected click load per window exceeds the configured cap.
struct RateOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Emitter rates incompatible with a renewal cycle (flux >= recycle rate).
struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rate skeleton of one transiting emitter, reduced from the steady-state
// solution. The emitter alternates between an emitting ("armed") state and a
// recycling dead time; emission_rate is calibrated so that the time-averaged
// output of the cycle reproduces photon_flux at full coupling:
//   armed_fraction = 1 - photon_flux / recycle_rate
//   emission_rate  = photon_flux / armed_fraction
struct EmitterModel {
  double photon_flux = 0.0;    // mean cavity output rate at h = 1, 1/s
  double emission_rate = 0.0;  // r0: rate while armed at h = 1, 1/s
  double armed_fraction = 0.0; // stationary probability of the armed state
  double recycle_rate = 0.0;   // dead -> armed rate, 1/s
  double escape_rate = 0.0;    // cavity intensity escape rate 2*kappa, 1/s
  double eta_out = 0.0;
  double eta_det = 0.0;
};

// Solves the master equation for n_bar and derives the cycle rates.
EmitterModel make_emitter_model(const SystemParams& p);
// Same reduction with the cavity photon number supplied by the caller.
EmitterModel make_emitter_model(const SystemParams& p, double nbar_cavity);

enum class SimMode { Particle, Wave, Combined };
enum class EnvelopeShape { Gaussian, Rectangular };

const char* to_string(SimMode m);
const char* to_string(EnvelopeShape s);

struct TransitConfig {
  double nbar_atoms = 2.0;  // mean simultaneous emitters
  double transit_s = 20e-6; // envelope time scale (rectangular width / 2x RMS)
  double window_s = 8e-3;   // acquisition window per drop
  int n_windows = 500;
  EnvelopeShape shape = EnvelopeShape::Gaussian;

  bool operator==(const TransitConfig&) const = default;

  void validate() const;
};

struct DetectionConfig {
  double eta_out = 0.90;
  double eta_det = 0.50;
  double dead_time_s = 0.0;        // per-channel paralyzing-free dead time
  double dark_rate_hz = 0.0;       // per channel
  double max_expected_clicks = 1e6; // cap per window, pre-check

  bool operator==(const DetectionConfig&) const = default;

  void validate() const;
};

// Generates a seeded two-channel click stream. Emitters arrive as a Poisson
// process at rate nbar_atoms/transit_s; each carries an amplitude envelope
// h(t) (rectangular: 1 on [c-T/2, c+T/2); gaussian: RMS width T/2, truncated
// at 3 sigma). Photon events by mode:
//   Particle: per-emitter renewal cycle, rate r0*h^2 while armed, each photon
//             delayed by an exponential cavity escape time.
//   Wave:     doubly stochastic stream with intensity flux*|E|^2 where
//             E = sum_j h_j exp(i phi_j); phases re-randomized at
//             recycle_rate epochs. No dead time, no escape delay.
//   Combined: intensity r0*|E|^2 over armed emitters with the same phase
//             scrambling clock as wave mode; every photon is attributed to an
//             armed emitter with probability h^2/sum h^2, which then goes
//             dead (term dropped from E, fresh phase on return). No escape
//             delay.
// Each photon then passes eta_out, a fair splitter, and eta_det; dark counts
// are added per channel and a dead-time filter is applied last. Windows use
// independent RNG streams derived from (seed, window id), so results do not
// depend on thread count.
ClickStream simulate(const EmitterModel& em, SimMode mode, const TransitConfig& transit,
                     const DetectionConfig& det, uint64_t seed, int threads = 1);

// Time average of h^2 over one transit divided by transit_s (1 for
// rectangular, ~0.886 for the truncated gaussian). Scales rate predictions.
double mean_coupling_square(const TransitConfig& transit);

// Predicted detected rate per channel for the whole ensemble.
double predicted_channel_rate(const EmitterModel& em, const TransitConfig& transit,
                              const DetectionConfig& det);

// Single-emitter correlation functions of the generated point processes, for
// cross-checking simulated streams against the ensemble composition:
//   Particle:  g1 = 0;            g2 = 1 - smeared dip (escape-delay Laplace
//                                      blur of 1 - exp(-(r0+R)|tau|))
//   Wave:      g1 = exp(-R|tau|);      g2 = 1
//   Combined:  g1 = exp(-(r0+R)|tau|); g2 = 1 - exp(-(r0+R)|tau|)
// with R = recycle_rate (the phasor of an armed emitter survives neither a
// phase reset nor an attributed emission). These describe the stochastic
// processes themselves, not the underlying master equation.
CorrelationCurve process_field_correlation(const EmitterModel& em, SimMode mode,
                                           const std::vector<double>& tau_grid);
CorrelationCurve process_intensity_correlation(const EmitterModel& em, SimMode mode,
                                               const std::vector<double>& tau_grid);

}  // namespace cavityg2
