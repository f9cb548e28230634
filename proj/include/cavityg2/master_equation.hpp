#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cavityg2/system_params.hpp"

namespace cavityg2 {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Thrown by steady_state() when the generator kernel is not one-dimensional
// (no unique stationary state) or the kernel vector is traceless.
struct DegenerateKernel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by evolve() when the adaptive integrator cannot meet its local error
// tolerance (step underflow or non-finite state).
struct StepSizeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Product basis: emitter level (|u>=0, |e>=1, |g>=2) x Fock state (0..n_max);
// index = level*(n_max+1) + n.
inline int space_dim(int n_max) { return 3 * (n_max + 1); }

Matrix annihilator(int n_max);               // identity_atom (x) a
Matrix number_op(int n_max);                 // identity_atom (x) a^dag a
Matrix atom_op(int n_max, int ket, int bra); // |ket><bra| (x) identity_fock

// H/hbar = -delta*P_e + (omega_p/2)(|e><u| + |u><e|)
//          + g_eff*(a^dag |g><e| + a |e><g|),  in rad/s.
Matrix build_hamiltonian(const SystemParams& p);

struct LindbladGenerator {
  Matrix h;
  std::vector<Matrix> jumps;
  std::vector<double> rates;

  // L(rho) = -i[H,rho] + sum_k rate_k (J rho J^dag - 1/2 {J^dag J, rho})
  Matrix apply(const Matrix& rho) const;

  // Dense superoperator in the column-major vec convention:
  // vec(A X B) = (B^T kron A) vec(X).
  Matrix superoperator() const;

  // Characteristic rate (max of |H| entries and rates); normalizes residuals
  // and sizes the first integrator step.
  double rate_scale() const;

  int dim() const { return static_cast<int>(h.rows()); }
};

// Dissipators: cavity decay (jump a, rate 2*kappa), spontaneous emission
// (|u><e| at branch_u*2*gamma, |g><e| at (1-branch_u)*2*gamma), and the
// incoherent repump (|u><g| at recycling_rate()).
LindbladGenerator build_lindblad(const SystemParams& p);

// Unique stationary state: Hermitian, trace one. Residual |L(rho)|_F measured
// relative to the generator rate scale is <= 1e-9. Throws DegenerateKernel if
// the second-smallest singular value of the superoperator is below 1e-6 of
// the largest.
Matrix steady_state(const LindbladGenerator& gen);

struct EvolveOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
};

// exp(L*tau)(rho0) at each grid point. tau_grid must be non-negative and
// strictly increasing. Adaptive Dormand-Prince 5(4) with steps clamped to
// land exactly on grid points; works on arbitrary (non-Hermitian) operators
// so it can serve two-time correlation evaluations.
std::vector<Matrix> evolve(const LindbladGenerator& gen, const Matrix& rho0,
                           const std::vector<double>& tau_grid,
                           const EvolveOptions& opt = {});

// Diagnostics used by tests and callers.
double hermiticity_defect(const Matrix& a);  // max_ij |a - a^dag|
double min_eigenvalue_hermitian(const Matrix& a);

}  // namespace cavityg2
