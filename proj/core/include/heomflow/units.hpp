#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace heomflow {

using Complex = std::complex<double>;

// Internally every energy is an angular frequency in rad/fs and every time
// is in fs, so hbar = 1. Spectroscopic inputs (cm^-1) are converted once at
// the boundary.
namespace units {

inline constexpr double kPi = 3.14159265358979323846;
// Speed of light in vacuum, cm/s (exact, SI definition).
inline constexpr double kSpeedOfLightCmPerS = 2.99792458e10;
// 2 pi c, expressed in rad/fs per cm^-1.
inline constexpr double kWavenumberToAngularFrequency = 2.0 * kPi * kSpeedOfLightCmPerS * 1e-15;
// k_B / (h c) in cm^-1 per K (CODATA 2018, exact to the digits shown).
inline constexpr double kBoltzmannWavenumberPerKelvin = 0.695034800;

constexpr double wavenumber_to_rad_per_fs(double wavenumber) {
  return wavenumber * kWavenumberToAngularFrequency;
}
constexpr double rad_per_fs_to_wavenumber(double omega) {
  return omega / kWavenumberToAngularFrequency;
}

}  // namespace units

// k_B T in cm^-1.
double thermal_energy(double temperature_kelvin);

// Single-excitation manifold of N coupled chromophores.
struct ExcitonModel {
  std::vector<double> site_energies_cm;
  Eigen::MatrixXd couplings_cm;  // symmetric, zero diagonal
  double reorganization_energy_cm = 0.0;

  int n_sites() const { return static_cast<int>(site_energies_cm.size()); }
  // Throws ConfigError listing every broken invariant.
  void validate() const;

  bool operator==(const ExcitonModel& other) const;
};

// Overdamped Drude-Lorentz bath, identical and uncorrelated on every site.
struct BathSpec {
  double reorganization_energy_cm = 0.0;
  double dissipation_rate_per_fs = 0.01;
  double temperature_kelvin = 300.0;

  double correlation_time_fs() const { return 1.0 / dissipation_rate_per_fs; }
  double lambda_rad_per_fs() const {
    return units::wavenumber_to_rad_per_fs(reorganization_energy_cm);
  }
  double thermal_energy_rad_per_fs() const {
    return units::wavenumber_to_rad_per_fs(thermal_energy(temperature_kelvin));
  }
  void validate() const;

  bool operator==(const BathSpec& other) const = default;
};

// The exciton model and bath share one reorganization energy. Building both
// through this helper keeps them from drifting apart.
struct PhysicalSystem {
  ExcitonModel model;
  BathSpec bath;

  static PhysicalSystem make(std::vector<double> site_energies_cm, Eigen::MatrixXd couplings_cm,
                             double lambda_cm, double gamma_per_fs, double temperature_kelvin);
  void validate() const;
};

// H_e / hbar in rad/fs: diagonal eps_m + lambda, off-diagonal J_mn.
Eigen::MatrixXcd build_hamiltonian(const ExcitonModel& model);

// J(omega) = 2 lambda gamma omega / (omega^2 + gamma^2), in the units of lambda
// (cm^-1). omega and gamma must share units; omega in rad/fs, gamma in fs^-1.
double spectral_density(double omega, const BathSpec& bath);

// c0 = 2 lambda k_B T - i lambda gamma in rad^2/fs^2 (high-temperature limit).
Complex c0(const BathSpec& bath);

struct HighTemperatureCheck {
  double hbar_gamma_beta = 0.0;
  bool satisfied = false;
};

// hbar gamma beta with gamma read as an angular frequency; valid when < 1.
HighTemperatureCheck high_temperature_check(const BathSpec& bath);

}  // namespace heomflow
