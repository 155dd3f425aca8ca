#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heomflow/propagator.hpp"

namespace heomflow {

enum class SeriesKind { SystemTraceDistance, AdoDistance };

struct DistanceSeries {
  std::vector<double> times_fs;
  std::vector<double> values;
  SeriesKind kind = SeriesKind::SystemTraceDistance;

  bool operator==(const DistanceSeries&) const = default;
};

// 1/2 Tr|a - b| via the eigenvalues of the Hermitian difference. Inputs must
// be Hermitian within 1e-9 (max-norm), otherwise ContractViolation.
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// 1/2 sum of singular values of m; defined for any square matrix.
double half_trace_norm(const Eigen::MatrixXcd& m);

DistanceSeries distance_series(const Trajectory& first, const Trajectory& second);

// Sum of the positive increments of the series on its (uniform) grid; the
// discrete form of the integral of dD/dt over the intervals where it is > 0.
double nm_ity(const DistanceSeries& series);

// Forward-difference slope per interval, for diagnostics only.
std::vector<double> slopes(const DistanceSeries& series);

// Total ADO distance over every n != 0 at each sample. Both trajectories need
// normalized snapshots on the same grid.
DistanceSeries ado_distance_series(const Trajectory& first, const Trajectory& second);

// Same quantity computed from a single hierarchy: the generator is linear, so
// evolving rho1 - rho2 yields the ADO differences directly. Returns the
// system and ADO series together.
struct PairDistances {
  DistanceSeries system;
  DistanceSeries ado;
};
PairDistances pair_distances_by_difference(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2,
                                           const ExcitonModel& model, const BathSpec& bath,
                                           const PropagationSettings& settings);
// System series only, same route.
DistanceSeries pair_trace_distance(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2,
                                   const ExcitonModel& model, const BathSpec& bath,
                                   const PropagationSettings& settings);

// Projector onto cos(theta/2)|1> + e^{i phi} sin(theta/2)|2>.
Eigen::MatrixXcd bloch_state(double theta, double phi);

struct BlochPoint {
  double theta = 0.0;
  double phi = 0.0;
};

// n >= 2 near-uniform points: both poles plus a Fibonacci lattice over the
// remaining n - 2.
std::vector<BlochPoint> bloch_candidates(int n_states);

struct PairScore {
  int first = 0;
  int second = 0;
  double value = 0.0;
};

struct NMResult {
  double value = 0.0;
  Eigen::MatrixXcd rho1;
  Eigen::MatrixXcd rho2;
  std::string pair_id;
  std::vector<BlochPoint> candidates;
  std::vector<PairScore> per_pair;
  int max_tier_used = 0;
  bool validity = false;
};

struct OptimizeSettings {
  int n_states = 50;
  int max_tier = 20;
  double t_end_fs = 2000.0;
  double dt_fs = 1.0;
  int sample_every = 10;
  double safety_factor = 5.0;
  CharacteristicFrequency omega_rule = CharacteristicFrequency::EigenvalueSpread;
};

// Maximises nm_ity over all pairs of Bloch-sphere candidates. Each candidate
// is propagated once and pairs are scored from the stored trajectories.
// Only two-site models are supported.
NMResult optimize_nm(const ExcitonModel& model, const BathSpec& bath, const OptimizeSettings& settings);

}  // namespace heomflow
