#include "cavityg2/master_equation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace cavityg2 {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix fock_annihilator(int n_max) {
  Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix atom_proj(int ket, int bra) {
  Matrix s = Matrix::Zero(3, 3);
  s(ket, bra) = 1.0;
  return s;
}

}  // namespace

Matrix annihilator(int n_max) { return kron(Matrix::Identity(3, 3), fock_annihilator(n_max)); }

Matrix number_op(int n_max) {
  const Matrix a = annihilator(n_max);
  return a.adjoint() * a;
}

Matrix atom_op(int n_max, int ket, int bra) {
  return kron(atom_proj(ket, bra), Matrix::Identity(n_max + 1, n_max + 1));
}

Matrix build_hamiltonian(const SystemParams& p) {
  p.validate();
  const int nf = p.n_max + 1;
  const Matrix a_f = fock_annihilator(p.n_max);
  const Matrix id_f = Matrix::Identity(nf, nf);

  Matrix h = -p.delta * kron(atom_proj(1, 1), id_f);
  h += 0.5 * p.omega_p * (kron(atom_proj(1, 0), id_f) + kron(atom_proj(0, 1), id_f));
  h += p.g_eff * (kron(atom_proj(2, 1), a_f.adjoint()) + kron(atom_proj(1, 2), a_f));
  return h;
}

LindbladGenerator build_lindblad(const SystemParams& p) {
  p.validate();
  LindbladGenerator gen;
  gen.h = build_hamiltonian(p);
  gen.jumps.push_back(annihilator(p.n_max));
  gen.rates.push_back(2.0 * p.kappa);
  gen.jumps.push_back(atom_op(p.n_max, 0, 1));  // |u><e|
  gen.rates.push_back(p.branch_u * 2.0 * p.gamma);
  gen.jumps.push_back(atom_op(p.n_max, 2, 1));  // |g><e|
  gen.rates.push_back((1.0 - p.branch_u) * 2.0 * p.gamma);
  gen.jumps.push_back(atom_op(p.n_max, 0, 2));  // |u><g| repump
  gen.rates.push_back(p.recycling_rate());
  return gen;
}

Matrix LindbladGenerator::apply(const Matrix& rho) const {
  const Complex i_unit(0.0, 1.0);
  Matrix out = -i_unit * (h * rho - rho * h);
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const Matrix& j = jumps[k];
    const Matrix jd = j.adjoint();
    const Matrix jdj = jd * j;
    out += rates[k] * (j * rho * jd - 0.5 * (jdj * rho + rho * jdj));
  }
  return out;
}

Matrix LindbladGenerator::superoperator() const {
  const int d = dim();
  const Matrix id = Matrix::Identity(d, d);
  const Complex i_unit(0.0, 1.0);
  Matrix s = -i_unit * (kron(id, h) - kron(h.transpose(), id));
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const Matrix& j = jumps[k];
    const Matrix jdj = j.adjoint() * j;
    s += rates[k] * (kron(j.conjugate(), j) -
                     0.5 * (kron(id, jdj) + kron(jdj.transpose(), id)));
  }
  return s;
}

double LindbladGenerator::rate_scale() const {
  double scale = h.cwiseAbs().maxCoeff();
  for (double r : rates) scale = std::max(scale, r);
  return std::max(scale, 1e-300);
}

Matrix steady_state(const LindbladGenerator& gen) {
  const int d = gen.dim();
  const double scale = gen.rate_scale();
  Matrix s = gen.superoperator() / scale;

  Eigen::BDCSVD<Matrix> svd(s, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const int n = static_cast<int>(sv.size());
  if (n >= 2 && sv(n - 2) < 1e-6 * sv(0))
    throw DegenerateKernel("steady_state: generator kernel is not one-dimensional");

  Vector v = svd.matrixV().col(n - 1);
  Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-10)
    throw DegenerateKernel("steady_state: kernel vector is traceless");
  rho /= tr;

  const double residual = gen.apply(rho).norm() / scale;
  if (!(residual <= 1e-9))
    throw std::runtime_error("steady_state: residual exceeds 1e-9 of the rate scale");
  return rho;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// b - b_hat (embedded 4th-order error weights, k7 = f(y_new)).
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

}  // namespace

std::vector<Matrix> evolve(const LindbladGenerator& gen, const Matrix& rho0,
                           const std::vector<double>& tau_grid, const EvolveOptions& opt) {
  const int d = gen.dim();
  if (rho0.rows() != d || rho0.cols() != d)
    throw std::invalid_argument("evolve: operator dimension mismatch");
  if (tau_grid.empty()) return {};
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] <= tau_grid[i - 1]))
      throw std::invalid_argument("evolve: tau_grid must be non-negative and increasing");
  }
  if (!rho0.allFinite()) throw StepSizeFailure("evolve: non-finite initial operator");

  const Matrix s = gen.superoperator();
  const int nd = d * d;
  Vector y = Eigen::Map<const Vector>(rho0.data(), nd);

  std::vector<Matrix> out;
  out.reserve(tau_grid.size());

  Vector k1(nd), k2(nd), k3(nd), k4(nd), k5(nd), k6(nd), k7(nd), ytmp(nd), ynew(nd);
  k1.noalias() = s * y;
  bool k1_fresh = true;

  const double scale = gen.rate_scale();
  double h = 0.25 / scale;
  double t = 0.0;
  const double t_end = tau_grid.back();
  const double h_min = std::max(t_end * 1e-16, 1e-22);

  std::size_t gi = 0;
  auto emit_current = [&]() {
    out.push_back(Eigen::Map<const Matrix>(y.data(), d, d));
  };
  while (gi < tau_grid.size() && tau_grid[gi] <= t) {  // grid may start at 0
    emit_current();
    ++gi;
  }

  auto err_norm = [&](const Vector& e, const Vector& y0, const Vector& y1) {
    double acc = 0.0;
    for (int i = 0; i < nd; ++i) {
      const double sc =
          opt.atol + opt.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
      const double r = std::abs(e(i)) / sc;
      acc += r * r;
    }
    return std::sqrt(acc / nd);
  };

  while (gi < tau_grid.size()) {
    const double t_target = tau_grid[gi];
    bool clamped = false;
    double h_try = h;
    if (t + h_try >= t_target) {
      h_try = t_target - t;
      clamped = true;
    }

    if (!k1_fresh) {
      k1.noalias() = s * y;
      k1_fresh = true;
    }
    ytmp.noalias() = y + h_try * (kA21 * k1);
    k2.noalias() = s * ytmp;
    ytmp.noalias() = y + h_try * (kA31 * k1 + kA32 * k2);
    k3.noalias() = s * ytmp;
    ytmp.noalias() = y + h_try * (kA41 * k1 + kA42 * k2 + kA43 * k3);
    k4.noalias() = s * ytmp;
    ytmp.noalias() = y + h_try * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    k5.noalias() = s * ytmp;
    ytmp.noalias() = y + h_try * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    k6.noalias() = s * ytmp;
    ynew.noalias() = y + h_try * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    k7.noalias() = s * ynew;

    ytmp.noalias() = kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7;
    const double err = err_norm(h_try * ytmp, y, ynew);
    if (!std::isfinite(err))
      throw StepSizeFailure("evolve: non-finite state during integration");

    if (err <= 1.0) {
      t = clamped ? t_target : t + h_try;
      y.swap(ynew);
      k1 = k7;  // first-same-as-last
      k1_fresh = true;
      if (clamped) {
        emit_current();
        ++gi;
      }
      const double grow = (err == 0.0) ? 5.0 : 0.9 * std::pow(err, -0.2);
      const double h_next = h_try * std::clamp(grow, 0.2, 5.0);
      if (!clamped || h_next > h) h = h_next;
    } else {
      h = h_try * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      k1_fresh = true;  // k1 still matches y
      if (h < h_min)
        throw StepSizeFailure("evolve: step size underflow while meeting tolerance");
    }
  }
  return out;
}

double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue_hermitian(const Matrix& a) {
  const Matrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace cavityg2
