#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heomflow/hierarchy_index.hpp"
#include "heomflow/measures.hpp"
#include "heomflow/propagator.hpp"
#include "heomflow/units.hpp"

namespace heomflow {

inline constexpr int kSchemaVersion = 1;

enum class TaskKind { Pair, Optimize, Scan };
enum class ScanParameter { Coupling, SiteEnergyGap, DissipationRate, ReorganizationEnergy };
enum class PairMode { FixedSitePair, Optimized };

struct ModelBlock {
  std::vector<double> site_energies_cm;
  Eigen::MatrixXd couplings_cm;  // always held as the full symmetric matrix
  std::string source;            // free-form provenance note, may be empty

  bool operator==(const ModelBlock& other) const;
};

struct BathBlock {
  double lambda_cm = 0.0;
  // Exactly one of these is set.
  std::optional<double> tau_c_fs;
  std::optional<double> gamma_per_fs;
  double temperature_K = 288.0;
  // Run even when hbar gamma beta >= 1 (a warning is still emitted).
  bool allow_low_temperature = false;

  double gamma() const { return gamma_per_fs ? *gamma_per_fs : 1.0 / *tau_c_fs; }
  bool operator==(const BathBlock&) const = default;
};

struct HierarchyBlock {
  int max_tier = 0;
  Representation representation = Representation::Normalized;
  double safety_factor = 5.0;
  CharacteristicFrequency omega_e = CharacteristicFrequency::EigenvalueSpread;

  bool operator==(const HierarchyBlock&) const = default;
};

struct IntegrationBlock {
  double dt_fs = 1.0;
  double t_end_fs = 4000.0;
  int sample_every = 10;

  bool operator==(const IntegrationBlock&) const = default;
};

struct OptimizeBlock {
  int n_states = 50;
  int max_tier = 20;
  double t_end_fs = 2000.0;

  bool operator==(const OptimizeBlock&) const = default;
};

struct ScanBlock {
  ScanParameter parameter = ScanParameter::ReorganizationEnergy;
  // Units follow the parameter: cm^-1 for energies, fs^-1 for the rate.
  std::vector<double> grid;
  PairMode pair_mode = PairMode::FixedSitePair;
  std::vector<double> correlation_times_fs;
  double t_end_fs = 4000.0;
  int threads = 1;

  bool operator==(const ScanBlock&) const = default;
};

struct TaskBlock {
  TaskKind kind = TaskKind::Pair;
  std::array<int, 2> initial_sites{1, 2};  // one-based site labels
  // Curves reported by presets and used as scan defaults.
  std::vector<double> correlation_times_fs;
  OptimizeBlock optimize;
  std::optional<ScanBlock> scan;

  bool operator==(const TaskBlock&) const = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ModelBlock model;
  BathBlock bath;
  HierarchyBlock hierarchy;
  IntegrationBlock integration;
  TaskBlock task;

  bool operator==(const RunConfig&) const = default;

  PhysicalSystem physical_system() const;
  PropagationSettings propagation_settings() const;
  OptimizeSettings optimize_settings() const;
};

// Parses and validates the JSON configuration. Unknown keys and unit
// suffixes that do not match the schema are rejected; every problem found is
// reported in one ConfigError.
RunConfig parse_config(const std::string& text);

// Canonical JSON text; parse_config(serialize_config(c)) == c. A negative
// indent gives the single-line form used in output headers.
std::string serialize_config(const RunConfig& config, int indent = 2);

// Semantic checks shared by the parser and programmatic callers.
std::vector<std::string> validate_config(const RunConfig& config);

std::string to_string(Representation r);
std::string to_string(ScanParameter p);
std::string to_string(PairMode p);
std::string to_string(TaskKind k);
std::optional<ScanParameter> scan_parameter_from_string(const std::string& name);

}  // namespace heomflow
