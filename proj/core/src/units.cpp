#include "heomflow/units.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "heomflow/errors.hpp"

namespace heomflow {

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::ostringstream os;
        for (std::size_t i = 0; i < problems.size(); ++i) {
          if (i) os << "; ";
          os << problems[i];
        }
        return os.str();
      }()),
      problems_(std::move(problems)) {}

double thermal_energy(double temperature_kelvin) {
  return units::kBoltzmannWavenumberPerKelvin * temperature_kelvin;
}

void ExcitonModel::validate() const {
  std::vector<std::string> problems;
  const auto n = site_energies_cm.size();
  if (n == 0) problems.emplace_back("exciton model needs at least one site");
  if (static_cast<std::size_t>(couplings_cm.rows()) != n ||
      static_cast<std::size_t>(couplings_cm.cols()) != n) {
    std::ostringstream os;
    os << "couplings matrix is " << couplings_cm.rows() << "x" << couplings_cm.cols() << ", expected "
       << n << "x" << n;
    problems.push_back(os.str());
  } else {
    for (Eigen::Index i = 0; i < couplings_cm.rows(); ++i) {
      if (couplings_cm(i, i) != 0.0) {
        problems.push_back("couplings diagonal entry " + std::to_string(i + 1) + " is not zero");
      }
      for (Eigen::Index j = i + 1; j < couplings_cm.cols(); ++j) {
        if (couplings_cm(i, j) != couplings_cm(j, i)) {
          problems.push_back("couplings matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")");
        }
      }
    }
    if (!couplings_cm.allFinite()) problems.emplace_back("couplings contain non-finite values");
  }
  for (double e : site_energies_cm) {
    if (!std::isfinite(e)) {
      problems.emplace_back("site energies contain non-finite values");
      break;
    }
  }
  if (!(reorganization_energy_cm >= 0.0) || !std::isfinite(reorganization_energy_cm)) {
    problems.emplace_back("reorganization energy must be finite and non-negative");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

bool ExcitonModel::operator==(const ExcitonModel& other) const {
  return site_energies_cm == other.site_energies_cm &&
         couplings_cm.rows() == other.couplings_cm.rows() &&
         couplings_cm.cols() == other.couplings_cm.cols() && couplings_cm == other.couplings_cm &&
         reorganization_energy_cm == other.reorganization_energy_cm;
}

void BathSpec::validate() const {
  std::vector<std::string> problems;
  if (!(reorganization_energy_cm >= 0.0) || !std::isfinite(reorganization_energy_cm)) {
    problems.emplace_back("reorganization energy must be finite and non-negative");
  }
  if (!(dissipation_rate_per_fs > 0.0) || !std::isfinite(dissipation_rate_per_fs)) {
    problems.emplace_back("dissipation rate must be finite and positive");
  }
  if (!(temperature_kelvin > 0.0) || !std::isfinite(temperature_kelvin)) {
    problems.emplace_back("temperature must be finite and positive");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

PhysicalSystem PhysicalSystem::make(std::vector<double> site_energies_cm,
                                    Eigen::MatrixXd couplings_cm, double lambda_cm,
                                    double gamma_per_fs, double temperature_kelvin) {
  PhysicalSystem sys;
  sys.model.site_energies_cm = std::move(site_energies_cm);
  sys.model.couplings_cm = std::move(couplings_cm);
  sys.model.reorganization_energy_cm = lambda_cm;
  sys.bath.reorganization_energy_cm = lambda_cm;
  sys.bath.dissipation_rate_per_fs = gamma_per_fs;
  sys.bath.temperature_kelvin = temperature_kelvin;
  sys.validate();
  return sys;
}

void PhysicalSystem::validate() const {
  model.validate();
  bath.validate();
  if (model.reorganization_energy_cm != bath.reorganization_energy_cm) {
    throw ConfigError("exciton model and bath disagree on the reorganization energy");
  }
}

Eigen::MatrixXcd build_hamiltonian(const ExcitonModel& model) {
  const int n = model.n_sites();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = units::wavenumber_to_rad_per_fs(model.site_energies_cm[i] +
                                              model.reorganization_energy_cm);
    for (int j = 0; j < n; ++j) {
      if (i != j) h(i, j) = units::wavenumber_to_rad_per_fs(model.couplings_cm(i, j));
    }
  }
  return h;
}

double spectral_density(double omega, const BathSpec& bath) {
  const double gamma = bath.dissipation_rate_per_fs;
  return 2.0 * bath.reorganization_energy_cm * gamma * omega / (omega * omega + gamma * gamma);
}

Complex c0(const BathSpec& bath) {
  const double lambda = bath.lambda_rad_per_fs();
  return {2.0 * lambda * bath.thermal_energy_rad_per_fs(), -lambda * bath.dissipation_rate_per_fs};
}

HighTemperatureCheck high_temperature_check(const BathSpec& bath) {
  const double gamma_cm = units::rad_per_fs_to_wavenumber(bath.dissipation_rate_per_fs);
  const double ratio = gamma_cm / thermal_energy(bath.temperature_kelvin);
  return {ratio, ratio < 1.0};
}

}  // namespace heomflow
