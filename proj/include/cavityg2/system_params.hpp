#pragma once

#include <cmath>
#include <stdexcept>

namespace cavityg2 {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Config files carry plain frequencies in MHz; internally everything is an
// angular frequency in rad/s.
inline constexpr double mhz_to_rad(double f_mhz) { return kTwoPi * 1.0e6 * f_mhz; }
inline constexpr double rad_to_mhz(double w) { return w / (kTwoPi * 1.0e6); }

// Parameters of a single three-level emitter (|u>, |e>, |g>) coupled to one
// cavity mode, plus the detection chain. All rates/frequencies in rad/s.
struct SystemParams {
  double g_max   = mhz_to_rad(2.5);   // peak emitter-cavity coupling
  double kappa   = mhz_to_rad(1.25);  // cavity field decay rate (intensity decays at 2*kappa)
  double gamma   = mhz_to_rad(3.0);   // polarization decay rate of |e> (population decays at 2*gamma)
  double omega_p = mhz_to_rad(7.6);   // pump Rabi frequency on |u> <-> |e>
  double omega_r = mhz_to_rad(3.3);   // recycling Rabi frequency driving the |g> repump
  double delta   = -mhz_to_rad(20.0); // pump detuning from |u> <-> |e>, signed
  double g_eff   = mhz_to_rad(2.5);   // coupling actually used (defaults to g_max)
  double branch_u = 5.0 / 9.0;        // fraction of |e> decay that returns to |u>
  double eta_out  = 0.90;             // useful cavity output fraction
  double eta_det  = 0.50;             // detector quantum efficiency per channel
  int n_max = 4;                      // Fock cutoff: photon states 0..n_max

  static SystemParams defaults() { return SystemParams{}; }

  bool operator==(const SystemParams&) const = default;

  void validate() const;

  // Two-photon Rabi frequency of the pump-cavity Raman transition after
  // adiabatic elimination of |e>: g_eff * omega_p / |delta|.
  double omega_eff() const { return g_eff * omega_p / std::abs(delta); }

  // Steady excited-state fraction of the resonantly driven recycling
  // transition: (omega_r^2/4) / (omega_r^2/2 + gamma^2).
  double rho_ee_recycle() const {
    const double o2 = omega_r * omega_r;
    return (o2 / 4.0) / (o2 / 2.0 + gamma * gamma);
  }

  // Incoherent |g> -> |u> repump rate: branch_u * 2*gamma * rho_ee_recycle().
  // Saturates at branch_u * gamma for omega_r -> infinity.
  double recycling_rate() const { return branch_u * 2.0 * gamma * rho_ee_recycle(); }
};

inline void SystemParams::validate() const {
  auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
  if (!(kappa > 0.0)) fail("SystemParams: kappa must be > 0");
  if (!(gamma > 0.0)) fail("SystemParams: gamma must be > 0");
  if (n_max < 2) fail("SystemParams: n_max must be >= 2");
  if (!(branch_u > 0.0 && branch_u < 1.0)) fail("SystemParams: branch_u must be in (0,1)");
  if (!(eta_out >= 0.0 && eta_out <= 1.0)) fail("SystemParams: eta_out must be in [0,1]");
  if (!(eta_det >= 0.0 && eta_det <= 1.0)) fail("SystemParams: eta_det must be in [0,1]");
  if (!(g_max >= 0.0 && g_eff >= 0.0)) fail("SystemParams: couplings must be >= 0");
  if (!(omega_p >= 0.0 && omega_r >= 0.0)) fail("SystemParams: Rabi frequencies must be >= 0");
  if (delta == 0.0) fail("SystemParams: delta must be nonzero");
}

}  // namespace cavityg2
