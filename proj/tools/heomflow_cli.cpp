// heomflow command-line front end.
//
// Exit codes: 0 ok, 1 bad input or configuration, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "heomflow/config.hpp"
#include "heomflow/errors.hpp"
#include "heomflow/io.hpp"
#include "heomflow/measures.hpp"
#include "heomflow/propagator.hpp"
#include "heomflow/scan.hpp"
#include "heomflow/version.hpp"

namespace fs = std::filesystem;
using namespace heomflow;

namespace {

struct Common {
  std::string config_path;
  std::optional<double> tau_c_fs;
  std::optional<double> lambda_cm;
  std::optional<int> max_tier;
  std::optional<double> t_end_fs;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--tau-c", c.tau_c_fs, "bath correlation time in fs (replaces tau_c_fs/gamma_per_fs)");
  cmd->add_option("--lambda", c.lambda_cm, "reorganization energy in cm^-1");
  cmd->add_option("--max-tier", c.max_tier, "hierarchy depth");
  cmd->add_option("--t-end", c.t_end_fs, "propagation horizon in fs");
  cmd->add_option("--out", c.out, "output file (default: stdout)");
}

std::string read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunConfig load(const Common& c) {
  RunConfig cfg = parse_config(read_text(c.config_path));
  if (c.tau_c_fs) {
    cfg.bath.tau_c_fs = *c.tau_c_fs;
    cfg.bath.gamma_per_fs.reset();
  }
  if (c.lambda_cm) cfg.bath.lambda_cm = *c.lambda_cm;
  if (c.max_tier) cfg.hierarchy.max_tier = *c.max_tier;
  if (c.t_end_fs) cfg.integration.t_end_fs = *c.t_end_fs;
  auto problems = validate_config(cfg);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

void warn(const std::string& text) { std::cerr << "warning: " << text << "\n"; }

// High-temperature and truncation diagnostics for a single-point run.
void diagnose(const RunConfig& cfg, int max_tier) {
  const auto sys = cfg.physical_system();
  const auto ht = high_temperature_check(sys.bath);
  if (!ht.satisfied) {
    if (!cfg.bath.allow_low_temperature) {
      throw ConfigError("hbar gamma beta = " + io::format_number(ht.hbar_gamma_beta) +
                        " >= 1, outside the high-temperature regime; set bath.allow_low_temperature to run anyway");
    }
    warn("hbar gamma beta = " + io::format_number(ht.hbar_gamma_beta) +
         " >= 1, outside the high-temperature regime");
  }
  if (!validity_flag(max_tier, sys.model, sys.bath, cfg.hierarchy.safety_factor, cfg.hierarchy.omega_e)) {
    warn("max_tier " + std::to_string(max_tier) + " is below the truncation requirement of " +
         std::to_string(required_depth(sys.model, sys.bath, cfg.hierarchy.safety_factor,
                                       cfg.hierarchy.omega_e)));
  }
}

io::FileHeader header_for(const RunConfig& cfg) { return {serialize_config(cfg, -1), {}}; }

template <typename Fn>
void emit(const std::string& out, Fn&& body) {
  if (out.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream os(out);
  if (!os) throw ConfigError("cannot open '" + out + "' for writing");
  body(os);
  if (!os.flush()) throw ConfigError("failed writing '" + out + "'");
}

Eigen::MatrixXcd site_state(const RunConfig& cfg, int site) {
  const int n = static_cast<int>(cfg.model.site_energies_cm.size());
  if (site < 1 || site > n) throw ConfigError("site " + std::to_string(site) + " is out of range");
  return site_projector(n, site - 1);
}

int run_propagate(const Common& c, std::optional<int> site, const std::string& ados_dir) {
  const RunConfig cfg = load(c);
  diagnose(cfg, cfg.hierarchy.max_tier);
  const auto sys = cfg.physical_system();
  auto settings = cfg.propagation_settings();
  settings.keep_ados = !ados_dir.empty();
  const auto traj = propagate(site_state(cfg, site.value_or(cfg.task.initial_sites[0])), sys.model,
                              sys.bath, settings);
  const auto header = header_for(cfg);
  emit(c.out, [&](std::ostream& os) { io::write_trajectory(os, traj, header); });
  if (!ados_dir.empty()) {
    fs::create_directories(ados_dir);
    for (std::size_t i = 0; i < traj.ado_snapshots.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "ado_%06zu.csv", i);
      std::ofstream os(fs::path(ados_dir) / name);
      if (!os) throw ConfigError("cannot write into '" + ados_dir + "'");
      io::write_ado_snapshot(os, traj.times_fs[i], traj.ado_snapshots[i], header);
    }
  }
  return 0;
}

enum class PairOutput { Distance, Nm, Ado };

int run_pair(const Common& c, PairOutput what) {
  const RunConfig cfg = load(c);
  diagnose(cfg, cfg.hierarchy.max_tier);
  const auto sys = cfg.physical_system();
  const auto settings = cfg.propagation_settings();
  const auto& sites = cfg.task.initial_sites;
  const auto rho1 = site_state(cfg, sites[0]);
  const auto rho2 = site_state(cfg, sites[1]);
  auto header = header_for(cfg);
  header.notes.push_back("pair: " + std::to_string(sites[0]) + "-" + std::to_string(sites[1]));

  if (what == PairOutput::Ado) {
    const auto d = pair_distances_by_difference(rho1, rho2, sys.model, sys.bath, settings);
    emit(c.out, [&](std::ostream& os) { io::write_series(os, d.ado, header); });
    return 0;
  }
  const auto series = pair_trace_distance(rho1, rho2, sys.model, sys.bath, settings);
  if (what == PairOutput::Distance) {
    emit(c.out, [&](std::ostream& os) { io::write_series(os, series, header); });
    return 0;
  }
  const double value = nm_ity(series);
  std::cout << io::format_number(value) << "\n";
  if (!c.out.empty()) {
    header.notes.push_back("nm_ity: " + io::format_number(value));
    emit(c.out, [&](std::ostream& os) { io::write_series(os, series, header); });
  }
  return 0;
}

int run_optimize(const Common& c, std::optional<int> n_states) {
  RunConfig cfg = load(c);
  if (n_states) cfg.task.optimize.n_states = *n_states;
  // --max-tier and --t-end refer to the optimization run here.
  if (c.max_tier) cfg.task.optimize.max_tier = *c.max_tier;
  if (c.t_end_fs) cfg.task.optimize.t_end_fs = *c.t_end_fs;
  auto problems = validate_config(cfg);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  diagnose(cfg, cfg.task.optimize.max_tier);
  const auto sys = cfg.physical_system();
  const auto result = optimize_nm(sys.model, sys.bath, cfg.optimize_settings());
  std::cout << io::format_number(result.value) << " " << result.pair_id << "\n";
  if (!c.out.empty()) {
    emit(c.out, [&](std::ostream& os) { io::write_pair_scores(os, result, header_for(cfg)); });
  }
  return 0;
}

int run_scan_cmd(const Common& c, const std::string& parameter, std::optional<int> threads) {
  RunConfig cfg = load(c);
  if (!cfg.task.scan) cfg.task.scan = ScanBlock{};
  if (!parameter.empty()) {
    const auto p = scan_parameter_from_string(parameter);
    if (!p) throw ConfigError("unknown scan parameter '" + parameter + "'");
    if (*p != cfg.task.scan->parameter) cfg.task.scan->grid.clear();
    cfg.task.scan->parameter = *p;
  }
  if (threads) cfg.task.scan->threads = *threads;
  if (c.tau_c_fs) cfg.task.scan->correlation_times_fs = {*c.tau_c_fs};
  if (c.t_end_fs) cfg.task.scan->t_end_fs = *c.t_end_fs;
  if (c.max_tier) cfg.task.optimize.max_tier = *c.max_tier;
  auto problems = validate_config(cfg);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  const auto spec = ScanSpec::from_config(cfg);
  const auto result = run_scan(spec, warn);
  emit(c.out, [&](std::ostream& os) { io::write_scan(os, result, header_for(cfg)); });
  return 0;
}

int run_preset(const std::string& name, const std::string& hamiltonian, const std::string& out) {
  RunConfig cfg;
  if (name == "dimer") {
    cfg = dimer_preset();
  } else {
    cfg = hamiltonian.empty() ? fmo_preset() : fmo_preset(hamiltonian);
  }
  emit(out, [&](std::ostream& os) { os << serialize_config(cfg); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heomflow: high-temperature HEOM propagation and trace-distance non-Markovianity"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  std::optional<int> site;
  std::string ados_dir;
  auto* propagate_cmd = app.add_subcommand("propagate", "propagate one site state, write the trajectory");
  add_common(propagate_cmd, common);
  propagate_cmd->add_option("--site", site, "initial site, 1-based (default: first of task.initial_sites)");
  propagate_cmd->add_option("--ados-dir", ados_dir, "also write normalized ADO snapshots, one file per sample");

  auto* distance_cmd = app.add_subcommand("distance", "trace-distance series of the site pair");
  add_common(distance_cmd, common);
  auto* nm_cmd = app.add_subcommand("nm", "NM-ity of the site pair");
  add_common(nm_cmd, common);
  auto* ado_cmd = app.add_subcommand("ado-distance", "total ADO distance series of the site pair");
  add_common(ado_cmd, common);

  std::optional<int> n_states;
  auto* optimize_cmd = app.add_subcommand("nm-optimize", "NM-ity maximized over Bloch-sphere pairs (two sites)");
  add_common(optimize_cmd, common);
  optimize_cmd->add_option("--n-states", n_states, "number of candidate pure states");

  std::string parameter;
  std::optional<int> threads;
  auto* scan_cmd = app.add_subcommand("scan", "NM-ity over a parameter grid");
  add_common(scan_cmd, common);
  scan_cmd->add_option("--parameter", parameter, "coupling|site_energy_gap|dissipation_rate|reorganization_energy");
  scan_cmd->add_option("--threads", threads, "worker threads");

  std::string preset_name;
  std::string hamiltonian;
  std::string preset_out;
  auto* preset_cmd = app.add_subcommand("preset", "print a built-in configuration");
  preset_cmd->add_option("name", preset_name, "dimer or fmo")->required()->check(CLI::IsMember({"dimer", "fmo"}));
  preset_cmd->add_option("--hamiltonian", hamiltonian, "FMO Hamiltonian file")->check(CLI::ExistingFile);
  preset_cmd->add_option("--out", preset_out, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*propagate_cmd) return run_propagate(common, site, ados_dir);
    if (*distance_cmd) return run_pair(common, PairOutput::Distance);
    if (*nm_cmd) return run_pair(common, PairOutput::Nm);
    if (*ado_cmd) return run_pair(common, PairOutput::Ado);
    if (*optimize_cmd) return run_optimize(common, n_states);
    if (*scan_cmd) return run_scan_cmd(common, parameter, threads);
    if (*preset_cmd) return run_preset(preset_name, hamiltonian, preset_out);
  } catch (const ConfigError& e) {
    if (e.problems().empty()) {
      std::cerr << "error: " << e.what() << "\n";
    } else {
      std::cerr << "error: invalid configuration\n";
      for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
    }
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
