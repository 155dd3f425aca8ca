#include "heomflow/scan.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "heomflow/errors.hpp"
#include "heomflow/io.hpp"

#ifndef HEOMFLOW_DEFAULT_DATA_DIR
#define HEOMFLOW_DEFAULT_DATA_DIR "data"
#endif

namespace heomflow {

namespace {

std::vector<double> linear_grid(double first, double last, int points) {
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) grid.push_back(first + (last - first) * i / (points - 1));
  return grid;
}

struct Job {
  double value = 0.0;
  double tau_c_fs = 0.0;
};

struct JobOutcome {
  ScanRow row;
  std::vector<std::string> warnings;
};

JobOutcome run_point(const ScanSpec& spec, const Job& job) {
  JobOutcome out;
  ScanRow& row = out.row;
  row.parameter = job.value;
  row.tau_c_fs = job.tau_c_fs;
  const std::string where = to_string(spec.parameter) + "=" + io::format_number(job.value) +
                            ", tau_c=" + io::format_number(job.tau_c_fs) + " fs";
  try {
    const RunConfig cfg = apply_scan_point(spec.base, spec.parameter, job.value, job.tau_c_fs);
    const auto problems = validate_config(cfg);
    if (!problems.empty()) throw ConfigError(problems);
    const PhysicalSystem sys = cfg.physical_system();

    const auto ht = high_temperature_check(sys.bath);
    row.high_temperature = ht.satisfied;
    if (!ht.satisfied) {
      out.warnings.push_back(where + ": outside the high-temperature regime (hbar gamma beta = " +
                             io::format_number(ht.hbar_gamma_beta) + ")");
    }

    if (spec.pair_mode == PairMode::FixedSitePair) {
      PropagationSettings settings = cfg.propagation_settings();
      settings.t_end_fs = spec.t_end_fs;
      const int n = sys.model.n_sites();
      const auto& sites = cfg.task.initial_sites;
      const auto series = pair_trace_distance(site_projector(n, sites[0] - 1),
                                              site_projector(n, sites[1] - 1), sys.model, sys.bath,
                                              settings);
      row.nm_ity = nm_ity(series);
      row.max_tier = settings.max_tier;
      row.pair_id = std::to_string(sites[0]) + "-" + std::to_string(sites[1]);
      row.valid = validity_flag(row.max_tier, sys.model, sys.bath, cfg.hierarchy.safety_factor,
                                cfg.hierarchy.omega_e);
    } else {
      const NMResult best = optimize_nm(sys.model, sys.bath, cfg.optimize_settings());
      row.nm_ity = best.value;
      row.max_tier = best.max_tier_used;
      row.pair_id = best.pair_id;
      row.valid = best.validity;
    }
    if (!row.valid) {
      out.warnings.push_back(where + ": max_tier " + std::to_string(row.max_tier) +
                             " is below the truncation requirement");
    }
  } catch (const std::exception& e) {
    row.nm_ity = std::numeric_limits<double>::quiet_NaN();
    row.status = std::string("error: ") + e.what();
    out.warnings.push_back(where + ": " + e.what());
  }
  return out;
}

}  // namespace

std::vector<double> default_grid(ScanParameter parameter) {
  switch (parameter) {
    case ScanParameter::Coupling:
      return linear_grid(-200.0, 0.0, 21);
    case ScanParameter::SiteEnergyGap:
      return linear_grid(0.0, 400.0, 21);
    case ScanParameter::DissipationRate: {
      // tau_c = 20, 30, ..., 200 fs, as increasing rates.
      std::vector<double> grid;
      for (int tau = 200; tau >= 20; tau -= 10) grid.push_back(1.0 / tau);
      return grid;
    }
    case ScanParameter::ReorganizationEnergy:
      return linear_grid(0.0, 300.0, 31);
  }
  return {};
}

ScanSpec ScanSpec::from_config(const RunConfig& config) {
  ScanSpec spec;
  spec.base = config;
  if (config.task.scan) {
    const auto& s = *config.task.scan;
    spec.parameter = s.parameter;
    spec.grid = s.grid;
    spec.pair_mode = s.pair_mode;
    spec.correlation_times_fs = s.correlation_times_fs;
    spec.t_end_fs = s.t_end_fs;
    spec.threads = s.threads;
  }
  if (spec.grid.empty()) spec.grid = default_grid(spec.parameter);
  if (spec.correlation_times_fs.empty()) spec.correlation_times_fs = config.task.correlation_times_fs;
  if (spec.correlation_times_fs.empty()) {
    spec.correlation_times_fs = {1.0 / config.bath.gamma()};
  }
  return spec;
}

RunConfig apply_scan_point(const RunConfig& base, ScanParameter parameter, double value,
                           double tau_c_fs) {
  RunConfig cfg = base;
  cfg.bath.tau_c_fs = tau_c_fs;
  cfg.bath.gamma_per_fs.reset();
  switch (parameter) {
    case ScanParameter::Coupling:
      cfg.model.couplings_cm(0, 1) = value;
      cfg.model.couplings_cm(1, 0) = value;
      break;
    case ScanParameter::SiteEnergyGap:
      cfg.model.site_energies_cm[1] = cfg.model.site_energies_cm[0] + value;
      break;
    case ScanParameter::DissipationRate:
      cfg.bath.tau_c_fs.reset();
      cfg.bath.gamma_per_fs = value;
      break;
    case ScanParameter::ReorganizationEnergy:
      cfg.bath.lambda_cm = value;
      break;
  }
  return cfg;
}

ScanResult run_scan(const ScanSpec& spec, const WarningSink& warn) {
  auto problems = validate_config(spec.base);
  if (spec.grid.empty()) problems.emplace_back("scan grid must not be empty");
  for (std::size_t i = 1; i < spec.grid.size(); ++i) {
    if (!(spec.grid[i] > spec.grid[i - 1])) {
      problems.emplace_back("scan grid must be strictly increasing");
      break;
    }
  }
  if (spec.parameter != ScanParameter::DissipationRate && spec.correlation_times_fs.empty()) {
    problems.emplace_back("scan needs at least one correlation time");
  }
  if (spec.threads < 1) problems.emplace_back("scan threads must be >= 1");
  if (!problems.empty()) throw ConfigError(problems);

  const auto base_check = high_temperature_check(spec.base.physical_system().bath);
  if (!base_check.satisfied && !spec.base.bath.allow_low_temperature) {
    throw ConfigError("base configuration violates the high-temperature condition (hbar gamma beta = " +
                      io::format_number(base_check.hbar_gamma_beta) +
                      "); set bath.allow_low_temperature to proceed");
  }

  std::vector<Job> jobs;
  for (double value : spec.grid) {
    if (spec.parameter == ScanParameter::DissipationRate) {
      jobs.push_back({value, 1.0 / value});
    } else {
      for (double tau : spec.correlation_times_fs) jobs.push_back({value, tau});
    }
  }

  std::vector<JobOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) outcomes[i] = run_point(spec, jobs[i]);
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  ScanResult result;
  result.parameter = spec.parameter;
  for (auto& outcome : outcomes) {
    if (warn) {
      for (const auto& w : outcome.warnings) warn(w);
    }
    result.rows.push_back(std::move(outcome.row));
  }
  return result;
}

RunConfig dimer_preset() {
  RunConfig c;
  c.model.site_energies_cm = {0.0, 120.0};
  c.model.couplings_cm = Eigen::MatrixXd::Zero(2, 2);
  c.model.couplings_cm(0, 1) = c.model.couplings_cm(1, 0) = -87.7;
  c.model.source = "FMO BChl 1-2 dimer";
  c.bath.lambda_cm = 20.0;
  c.bath.tau_c_fs = 100.0;
  c.bath.temperature_K = 288.0;
  c.hierarchy.max_tier = 39;
  c.hierarchy.representation = Representation::Normalized;
  c.integration.dt_fs = 1.0;
  c.integration.t_end_fs = 20000.0;
  c.integration.sample_every = 10;
  c.task.kind = TaskKind::Pair;
  c.task.initial_sites = {1, 2};
  c.task.correlation_times_fs = {50.0, 100.0, 150.0};
  return c;
}

std::filesystem::path default_fmo_data_path() {
  return std::filesystem::path(HEOMFLOW_DEFAULT_DATA_DIR) / "fmo_hamiltonian.csv";
}

RunConfig fmo_preset(const std::filesystem::path& hamiltonian_csv) {
  RunConfig c;
  c.model = io::read_hamiltonian_csv(hamiltonian_csv);
  if (c.model.site_energies_cm.size() != 7) {
    throw ConfigError(hamiltonian_csv.string() + ": the FMO model needs a 7x7 Hamiltonian");
  }
  c.bath.lambda_cm = 35.0;
  c.bath.tau_c_fs = 150.0;
  c.bath.temperature_K = 288.0;
  c.hierarchy.max_tier = 4;
  c.hierarchy.representation = Representation::Normalized;
  c.integration.dt_fs = 1.0;
  c.integration.t_end_fs = 4000.0;
  c.integration.sample_every = 10;
  c.task.kind = TaskKind::Pair;
  c.task.initial_sites = {1, 2};
  c.task.correlation_times_fs = {50.0, 100.0, 150.0};
  return c;
}

}  // namespace heomflow
