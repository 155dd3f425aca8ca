#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "heomflow/units.hpp"

namespace heomflow::test {

// cm^-1 -> rad/fs, written out from c rather than taken from the library.
inline constexpr double kConv = 2.0 * 3.141592653589793 * 2.99792458e10 * 1e-15;

inline PhysicalSystem dimer(double lambda_cm = 20.0, double tau_c_fs = 100.0, double j_cm = -87.7,
                            double gap_cm = 120.0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2, 2);
  J(0, 1) = J(1, 0) = j_cm;
  return PhysicalSystem::make({0.0, gap_cm}, J, lambda_cm, 1.0 / tau_c_fs, 288.0);
}

// exp(-iHt) rho exp(iHt) through the eigenbasis of the real symmetric H.
inline Eigen::MatrixXcd unitary_oracle(const Eigen::MatrixXd& h_rad_per_fs, const Eigen::MatrixXcd& rho0,
                                       double t_fs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h_rad_per_fs);
  const Eigen::MatrixXcd v = eig.eigenvectors().cast<std::complex<double>>();
  Eigen::VectorXcd phase(v.rows());
  for (Eigen::Index k = 0; k < v.rows(); ++k) phase[k] = std::polar(1.0, -eig.eigenvalues()[k] * t_fs);
  const Eigen::MatrixXcd u = v * phase.asDiagonal() * v.adjoint();
  return u * rho0 * u.adjoint();
}

// Hamiltonian assembled by hand: (eps + lambda) on the diagonal, J off it.
inline Eigen::MatrixXd hand_hamiltonian(const ExcitonModel& m) {
  Eigen::MatrixXd h = m.couplings_cm;
  for (int i = 0; i < m.n_sites(); ++i) h(i, i) = m.site_energies_cm[i] + m.reorganization_energy_cm;
  return h * kConv;
}

inline Eigen::MatrixXcd random_complex(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937& rng) {
  const Eigen::MatrixXcd a = random_complex(n, rng);
  return 0.5 * (a + a.adjoint());
}

// Mixed state from a Ginibre matrix.
inline Eigen::MatrixXcd random_density(int n, std::mt19937& rng) {
  const Eigen::MatrixXcd a = random_complex(n, rng);
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace();
}

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(random_complex(n, rng));
  return qr.householderQ();
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace heomflow::test
