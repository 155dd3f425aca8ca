#include "heomflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "heomflow/errors.hpp"

namespace heomflow {

namespace {

constexpr double kHermiticityTolerance = 1e-9;

double hermitian_half_trace_norm(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

void require_matching_grids(const Trajectory& first, const Trajectory& second) {
  if (first.times_fs != second.times_fs) {
    throw ContractViolation("trajectories are sampled on different time grids");
  }
  if (first.system_states.empty() ||
      first.system_states.front().rows() != second.system_states.front().rows()) {
    throw ContractViolation("trajectories describe systems of different size");
  }
}

}  // namespace

double half_trace_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return 0.5 * svd.singularValues().sum();
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw ContractViolation("trace distance needs square operators of equal size");
  }
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > kHermiticityTolerance ||
      (b - b.adjoint()).cwiseAbs().maxCoeff() > kHermiticityTolerance) {
    throw ContractViolation("trace distance needs Hermitian operators");
  }
  // a - b and b - a are exact negatives; fixing the sign makes the result
  // symmetric to the last bit.
  Eigen::MatrixXcd d = a - b;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const Complex z = d.data()[k];
    if (z.real() != 0.0 || z.imag() != 0.0) {
      if (z.real() < 0.0 || (z.real() == 0.0 && z.imag() < 0.0)) d = -d;
      break;
    }
  }
  return hermitian_half_trace_norm(d);
}

DistanceSeries distance_series(const Trajectory& first, const Trajectory& second) {
  require_matching_grids(first, second);
  DistanceSeries series;
  series.kind = SeriesKind::SystemTraceDistance;
  series.times_fs = first.times_fs;
  series.values.reserve(first.times_fs.size());
  for (std::size_t i = 0; i < first.system_states.size(); ++i) {
    series.values.push_back(trace_distance(first.system_states[i], second.system_states[i]));
  }
  return series;
}

double nm_ity(const DistanceSeries& series) {
  const auto& t = series.times_fs;
  if (t.size() >= 3) {
    const double h = t[1] - t[0];
    for (std::size_t i = 2; i < t.size(); ++i) {
      if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) {
        throw ContractViolation("nm_ity needs a uniform time grid");
      }
    }
  }
  double total = 0.0;
  for (std::size_t i = 1; i < series.values.size(); ++i) {
    total += std::max(0.0, series.values[i] - series.values[i - 1]);
  }
  return total;
}

std::vector<double> slopes(const DistanceSeries& series) {
  std::vector<double> out;
  for (std::size_t i = 1; i < series.values.size(); ++i) {
    out.push_back((series.values[i] - series.values[i - 1]) /
                  (series.times_fs[i] - series.times_fs[i - 1]));
  }
  return out;
}

namespace {

// 1/2 Tr|delta| for an ADO difference. The dynamics keeps ADOs Hermitian;
// if drift pushes one past tolerance the singular values are used instead.
double ado_half_trace_norm(const Eigen::MatrixXcd& delta) {
  const double scale = std::max(1.0, delta.cwiseAbs().maxCoeff());
  if ((delta - delta.adjoint()).cwiseAbs().maxCoeff() > kHermiticityTolerance * scale) {
    return half_trace_norm(delta);
  }
  return hermitian_half_trace_norm(delta);
}

double ado_distance(const HierarchyState& first, const HierarchyState& second) {
  double total = 0.0;
  for (Ordinal k = 1; k < first.size(); ++k) {
    total += ado_half_trace_norm(first.matrix(k) - second.matrix(k));
  }
  return total;
}

double ado_norm(const HierarchyState& difference) {
  double total = 0.0;
  for (Ordinal k = 1; k < difference.size(); ++k) total += ado_half_trace_norm(difference.matrix(k));
  return total;
}

}  // namespace

DistanceSeries ado_distance_series(const Trajectory& first, const Trajectory& second) {
  require_matching_grids(first, second);
  if (first.ado_snapshots.size() != first.times_fs.size() ||
      second.ado_snapshots.size() != second.times_fs.size()) {
    throw ContractViolation("ADO distance needs auxiliary snapshots at every sample");
  }
  DistanceSeries series;
  series.kind = SeriesKind::AdoDistance;
  series.times_fs = first.times_fs;
  for (std::size_t i = 0; i < first.ado_snapshots.size(); ++i) {
    const auto& a = first.ado_snapshots[i];
    const auto& b = second.ado_snapshots[i];
    if (a.representation() != Representation::Normalized ||
        b.representation() != Representation::Normalized) {
      throw ContractViolation("ADO distance uses normalized auxiliary operators");
    }
    if (&a.table() != &b.table() && a.table() != b.table()) {
      throw ContractViolation("ADO snapshots come from different hierarchies");
    }
    series.values.push_back(ado_distance(a, b));
  }
  return series;
}

namespace {

// Evolves rho1 - rho2 once. The difference is traceless and stays so; a drift
// means the integration went wrong.
PairDistances evolve_difference(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2,
                                const ExcitonModel& model, const BathSpec& bath,
                                const PropagationSettings& settings, bool with_ados) {
  PhysicalSystem{model, bath}.validate();
  if (rho1.rows() != model.n_sites() || rho2.rows() != model.n_sites() || rho1.cols() != rho1.rows() ||
      rho2.cols() != rho2.rows()) {
    throw ContractViolation("initial states do not match the model dimension");
  }
  check_stability(model, bath, settings.max_tier, settings.dt_fs);
  auto table = std::make_shared<const HierarchyIndexTable>(model.n_sites(), settings.max_tier);
  HierarchyState state =
      HierarchyState::from_system(table, rho1 - rho2, settings.representation);
  const Complex trace0 = (rho1 - rho2).trace();

  PairDistances out;
  out.system.kind = SeriesKind::SystemTraceDistance;
  out.ado.kind = SeriesKind::AdoDistance;
  double drift = 0.0;
  evolve(state, model, bath, settings, [&](double t, const HierarchyState& s) {
    const auto sys = s.matrix(0);
    drift = std::max(drift, std::abs(sys.trace() - trace0));
    out.system.times_fs.push_back(t);
    out.system.values.push_back(hermitian_half_trace_norm(sys));
    if (!with_ados) return;
    out.ado.times_fs.push_back(t);
    if (s.representation() == Representation::Normalized) {
      out.ado.values.push_back(ado_norm(s));
    } else {
      out.ado.values.push_back(ado_norm(convert_representation(s, Representation::Normalized, bath)));
    }
  });
  if (drift > kTraceDriftTolerance) {
    throw NumericalError("trace of the state difference drifted by " + std::to_string(drift));
  }
  return out;
}

}  // namespace

PairDistances pair_distances_by_difference(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2,
                                           const ExcitonModel& model, const BathSpec& bath,
                                           const PropagationSettings& settings) {
  return evolve_difference(rho1, rho2, model, bath, settings, true);
}

DistanceSeries pair_trace_distance(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2,
                                   const ExcitonModel& model, const BathSpec& bath,
                                   const PropagationSettings& settings) {
  return evolve_difference(rho1, rho2, model, bath, settings, false).system;
}

Eigen::MatrixXcd bloch_state(double theta, double phi) {
  Eigen::Vector2cd psi;
  psi << std::cos(theta / 2.0), std::polar(1.0, phi) * std::sin(theta / 2.0);
  return psi * psi.adjoint();
}

std::vector<BlochPoint> bloch_candidates(int n_states) {
  if (n_states < 2) throw ConfigError("need at least two candidate states");
  std::vector<BlochPoint> points;
  points.push_back({0.0, 0.0});
  points.push_back({units::kPi, 0.0});
  const int rest = n_states - 2;
  const double golden_angle = units::kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < rest; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / rest;
    points.push_back({std::acos(z), std::fmod(i * golden_angle, 2.0 * units::kPi)});
  }
  return points;
}

NMResult optimize_nm(const ExcitonModel& model, const BathSpec& bath, const OptimizeSettings& settings) {
  if (model.n_sites() != 2) {
    throw ConfigError("initial-state optimization is only defined for two-site models");
  }
  NMResult result;
  result.candidates = bloch_candidates(settings.n_states);
  result.max_tier_used = settings.max_tier;
  result.validity =
      validity_flag(settings.max_tier, model, bath, settings.safety_factor, settings.omega_rule);

  PropagationSettings prop;
  prop.max_tier = settings.max_tier;
  prop.t_end_fs = settings.t_end_fs;
  prop.dt_fs = settings.dt_fs;
  prop.sample_every = settings.sample_every;
  prop.representation = Representation::Normalized;

  std::vector<Trajectory> trajectories;
  std::vector<Eigen::MatrixXcd> states;
  for (const auto& p : result.candidates) {
    states.push_back(bloch_state(p.theta, p.phi));
    trajectories.push_back(propagate(states.back(), model, bath, prop));
  }

  result.value = -1.0;
  const int n = settings.n_states;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = nm_ity(distance_series(trajectories[i], trajectories[j]));
      result.per_pair.push_back({i, j, v});
      if (v > result.value) {
        result.value = v;
        result.rho1 = states[i];
        result.rho2 = states[j];
        result.pair_id = std::to_string(i + 1) + "-" + std::to_string(j + 1);
      }
    }
  }
  return result;
}

}  // namespace heomflow
