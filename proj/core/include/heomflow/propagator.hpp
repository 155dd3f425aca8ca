#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "heomflow/hierarchy_index.hpp"
#include "heomflow/units.hpp"

namespace heomflow {

enum class Representation { Regular, Normalized };

// System density matrix plus every auxiliary operator, stored contiguously
// (column-major N x N blocks in table order).
class HierarchyState {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXcd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXcd>;

  HierarchyState(std::shared_ptr<const HierarchyIndexTable> table, Representation representation);

  // rho0 in the system slot, every ADO zero.
  static HierarchyState from_system(std::shared_ptr<const HierarchyIndexTable> table,
                                    const Eigen::MatrixXcd& rho0, Representation representation);

  const HierarchyIndexTable& table() const { return *table_; }
  const std::shared_ptr<const HierarchyIndexTable>& shared_table() const { return table_; }
  Representation representation() const { return representation_; }
  int dim() const { return dim_; }
  std::size_t size() const { return table_->size(); }

  MatrixMap matrix(Ordinal k) { return {data_.data() + k * block(), dim_, dim_}; }
  ConstMatrixMap matrix(Ordinal k) const { return {data_.data() + k * block(), dim_, dim_}; }
  Eigen::MatrixXcd system() const { return matrix(0); }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  std::size_t block() const { return static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_); }

 private:
  std::shared_ptr<const HierarchyIndexTable> table_;
  Representation representation_;
  int dim_;
  std::vector<Complex> data_;
};

// phi_m sigma = i [V_m, sigma], V_m = |m><m|.
Eigen::MatrixXcd phi_apply(int site, const Eigen::MatrixXcd& sigma);

// theta_m sigma = i (2 lambda k_B T) [V_m, sigma] + lambda gamma {V_m, sigma}.
Eigen::MatrixXcd theta_apply(int site, const Eigen::MatrixXcd& sigma, const BathSpec& bath);

// Linear generator of the high-temperature hierarchy. All per-ordinal
// coefficients are precomputed so apply() only streams over the state.
class HeomGenerator {
 public:
  HeomGenerator(const ExcitonModel& model, const BathSpec& bath,
                std::shared_ptr<const HierarchyIndexTable> table, Representation representation);

  // out = d/dt in. Both spans hold table().size() blocks of N x N.
  void apply(std::span<const Complex> in, std::span<Complex> out) const;

  const HierarchyIndexTable& table() const { return *table_; }
  Representation representation() const { return representation_; }
  int dim() const { return dim_; }

 private:
  std::shared_ptr<const HierarchyIndexTable> table_;
  Representation representation_;
  int dim_;
  std::vector<double> hamiltonian_;   // column-major, real symmetric
  std::vector<double> damping_;       // tier * gamma per ordinal
  // Coupling links indexed by ordinal * N + site; target -1 when absent.
  std::vector<std::int64_t> up_target_;  // phi couplings
  std::vector<double> up_weight_;
  std::vector<std::int64_t> down_target_;  // theta couplings
  std::vector<double> down_weight_;
  Complex theta_row_;                 // coefficient of V sigma inside theta
  Complex theta_col_;                 // coefficient of sigma V inside theta
};

// Time derivative of a regular-representation state.
HierarchyState rhs(const HierarchyState& state, const ExcitonModel& model, const BathSpec& bath);
// Time derivative of a normalized-representation state.
HierarchyState rhs_normalized(const HierarchyState& state, const ExcitonModel& model,
                              const BathSpec& bath);

// Applies (prod_m n_m! |c0|^n_m)^(-1/2) going Regular -> Normalized and its
// inverse the other way. Throws ContractViolation when |c0| = 0 and an ADO is
// non-zero.
HierarchyState convert_representation(const HierarchyState& state, Representation target,
                                      const BathSpec& bath);

struct PropagationSettings {
  int max_tier = 0;
  double t_end_fs = 0.0;
  double dt_fs = 1.0;
  int sample_every = 10;
  Representation representation = Representation::Normalized;
  bool keep_ados = false;
};

struct TrajectoryMetadata {
  ExcitonModel model;
  BathSpec bath;
  int max_tier = 0;
  double dt_fs = 0.0;
  Representation representation = Representation::Normalized;
};

struct Trajectory {
  std::vector<double> times_fs;
  std::vector<Eigen::MatrixXcd> system_states;
  // Normalized representation, aligned with times_fs; empty unless requested.
  std::vector<HierarchyState> ado_snapshots;
  TrajectoryMetadata metadata;
};

// Largest dt * (max_tier * gamma + omega_e) accepted by propagate.
inline constexpr double kStabilityLimit = 2.5;
inline constexpr double kTraceDriftTolerance = 1e-6;

// Throws ConfigError when the step size violates the stability bound.
void check_stability(const ExcitonModel& model, const BathSpec& bath, int max_tier, double dt_fs);

using SampleObserver = std::function<void(double time_fs, const HierarchyState& state)>;

// Fixed-step RK4 from an arbitrary hierarchy state. The observer sees the
// state at t = 0 and after every sample_every steps. No density-matrix
// preconditions are imposed, so this also evolves differences of states.
void evolve(HierarchyState& state, const ExcitonModel& model, const BathSpec& bath,
            const PropagationSettings& settings, const SampleObserver& observer);

// Propagates rho0 from the Franck-Condon condition (all ADOs zero).
// Throws ConfigError for invalid inputs or an unstable step and
// NumericalError if the trace drifts by more than 1e-6.
Trajectory propagate(const Eigen::MatrixXcd& rho0, const ExcitonModel& model, const BathSpec& bath,
                     const PropagationSettings& settings);

// |k><k| for a zero-based site k.
Eigen::MatrixXcd site_projector(int n_sites, int site);

}  // namespace heomflow
