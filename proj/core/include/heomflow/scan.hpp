#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "heomflow/config.hpp"

namespace heomflow {

struct ScanSpec {
  RunConfig base;
  ScanParameter parameter = ScanParameter::ReorganizationEnergy;
  std::vector<double> grid;
  PairMode pair_mode = PairMode::FixedSitePair;
  // One curve per value. Ignored for dissipation-rate scans, where the grid
  // itself sets tau_c.
  std::vector<double> correlation_times_fs;
  double t_end_fs = 4000.0;
  int threads = 1;

  // Takes the scan block of `config`, falling back to default_grid and to
  // task.correlation_times_fs (or the bath's own tau_c).
  static ScanSpec from_config(const RunConfig& config);
};

struct ScanRow {
  double parameter = 0.0;
  double tau_c_fs = 0.0;
  double nm_ity = 0.0;
  bool valid = false;
  int max_tier = 0;
  std::string pair_id;
  bool high_temperature = true;
  std::string status = "ok";  // error text when the point failed

  bool operator==(const ScanRow&) const = default;
};

struct ScanResult {
  ScanParameter parameter = ScanParameter::ReorganizationEnergy;
  std::vector<ScanRow> rows;

  bool operator==(const ScanResult&) const = default;
};

using WarningSink = std::function<void(const std::string&)>;

// Evaluates NM-ity on every (grid point, tau_c) combination. Points are
// independent and run on `threads` workers; rows come back in grid-major,
// tau_c-minor order regardless of scheduling. A failing point is recorded in
// its row; only an invalid base configuration throws.
ScanResult run_scan(const ScanSpec& spec, const WarningSink& warn = {});

// Applies one scan coordinate to a configuration.
RunConfig apply_scan_point(const RunConfig& base, ScanParameter parameter, double value,
                           double tau_c_fs);

std::vector<double> default_grid(ScanParameter parameter);

// Two-site subsystem of FMO sites 1 and 2: lambda = 20 cm^-1, T = 288 K,
// tau_c curves 50/100/150 fs, max_tier 39 (819 ADOs), 20 ps horizon.
RunConfig dimer_preset();

std::filesystem::path default_fmo_data_path();

// Seven-site FMO model from the Hamiltonian file, max_tier 4 (329 ADOs).
RunConfig fmo_preset(const std::filesystem::path& hamiltonian_csv = default_fmo_data_path());

}  // namespace heomflow
