#include "heomflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "heomflow/errors.hpp"

namespace heomflow {

using nlohmann::json;

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Representation> kRepresentations[] = {
    {Representation::Regular, "regular"}, {Representation::Normalized, "normalized"}};
constexpr EnumName<ScanParameter> kScanParameters[] = {
    {ScanParameter::Coupling, "coupling"},
    {ScanParameter::SiteEnergyGap, "site_energy_gap"},
    {ScanParameter::DissipationRate, "dissipation_rate"},
    {ScanParameter::ReorganizationEnergy, "reorganization_energy"}};
constexpr EnumName<PairMode> kPairModes[] = {{PairMode::FixedSitePair, "fixed_site_pair"},
                                             {PairMode::Optimized, "optimized"}};
constexpr EnumName<TaskKind> kTaskKinds[] = {
    {TaskKind::Pair, "pair"}, {TaskKind::Optimize, "optimize"}, {TaskKind::Scan, "scan"}};
constexpr EnumName<CharacteristicFrequency> kOmegaRules[] = {
    {CharacteristicFrequency::EigenvalueSpread, "eigenvalue_spread"},
    {CharacteristicFrequency::MaxAbsCoupling, "max_abs_coupling"}};

template <typename E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E value) {
  for (const auto& entry : table) {
    if (entry.value == value) return entry.name;
  }
  return "?";
}

// Accumulates every problem instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> problems;

  // Rejects keys outside `allowed`. A key sharing a stem with an allowed
  // unit-suffixed key is reported as a unit mismatch.
  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (allowed.count(key)) continue;
      std::string hint;
      for (const auto& candidate : allowed) {
        const auto cut = candidate.rfind('_');
        if (cut == std::string::npos) continue;
        const std::string stem = candidate.substr(0, cut + 1);
        if (key.rfind(stem, 0) == 0 && key.size() > stem.size() &&
            key.find('_', stem.size()) == std::string::npos) {
          hint = candidate;
          break;
        }
      }
      if (!hint.empty()) {
        problems.push_back(path + "." + key + ": unit suffix mismatch, expected '" + hint + "'");
      } else {
        problems.push_back(path + "." + key + ": unknown key");
      }
    }
  }

  const json* object(const json& parent, const std::string& key, const std::string& path,
                     bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) problems.push_back(path + "." + key + ": missing");
      return nullptr;
    }
    if (!it->is_object()) {
      problems.push_back(path + "." + key + ": expected an object");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) problems.push_back(path + "." + key + ": missing");
      return std::nullopt;
    }
    if (!it->is_number()) {
      problems.push_back(path + "." + key + ": expected a number");
      return std::nullopt;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
      problems.push_back(path + "." + key + ": must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<int> integer(const json& obj, const std::string& key, const std::string& path,
                             bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) problems.push_back(path + "." + key + ": missing");
      return std::nullopt;
    }
    if (!it->is_number_integer()) {
      problems.push_back(path + "." + key + ": expected an integer");
      return std::nullopt;
    }
    return it->get<int>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& key,
                                             const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) problems.push_back(path + "." + key + ": missing");
      return std::nullopt;
    }
    if (!it->is_array()) {
      problems.push_back(path + "." + key + ": expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& v : *it) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        problems.push_back(path + "." + key + ": expected finite numbers only");
        return std::nullopt;
      }
      out.push_back(v.get<double>());
    }
    return out;
  }

  template <typename E, std::size_t N>
  std::optional<E> choice(const json& obj, const std::string& key, const std::string& path,
                          const EnumName<E> (&table)[N]) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (it->is_string()) {
      const auto text = it->get<std::string>();
      for (const auto& entry : table) {
        if (text == entry.name) return entry.value;
      }
    }
    std::string options;
    for (const auto& entry : table) options += std::string(options.empty() ? "" : ", ") + entry.name;
    problems.push_back(path + "." + key + ": expected one of " + options);
    return std::nullopt;
  }
};

void read_model(Reader& r, const json& obj, ModelBlock& model) {
  const std::string path = "model";
  r.check_keys(obj, path, {"site_energies_cm", "couplings_cm", "couplings_upper_cm", "source"});
  if (auto v = r.numbers(obj, "site_energies_cm", path, true)) model.site_energies_cm = *v;
  const auto n = static_cast<Eigen::Index>(model.site_energies_cm.size());

  const bool has_full = obj.contains("couplings_cm");
  const bool has_upper = obj.contains("couplings_upper_cm");
  if (has_full && has_upper) {
    r.problems.emplace_back("model: give either couplings_cm or couplings_upper_cm, not both");
  } else if (!has_full && !has_upper) {
    if (n == 1) {
      model.couplings_cm = Eigen::MatrixXd::Zero(1, 1);
    } else {
      r.problems.emplace_back("model.couplings_cm: missing");
    }
  } else if (has_full) {
    const auto& rows = obj.at("couplings_cm");
    bool ok = rows.is_array() && static_cast<Eigen::Index>(rows.size()) == n;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; ok && i < n; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
        ok = false;
        break;
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto& v = row[static_cast<std::size_t>(j)];
        if (!v.is_number()) {
          ok = false;
          break;
        }
        m(i, j) = v.get<double>();
      }
    }
    if (ok) {
      model.couplings_cm = m;
    } else {
      r.problems.push_back("model.couplings_cm: expected a " + std::to_string(n) + "x" +
                           std::to_string(n) + " numeric matrix");
    }
  } else {
    auto upper = r.numbers(obj, "couplings_upper_cm", path, true);
    const auto expected = static_cast<std::size_t>(n * (n - 1) / 2);
    if (upper && upper->size() == expected) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
      std::size_t idx = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          m(i, j) = m(j, i) = (*upper)[idx++];
        }
      }
      model.couplings_cm = m;
    } else if (upper) {
      r.problems.push_back("model.couplings_upper_cm: expected " + std::to_string(expected) +
                           " values (row-major strict upper triangle)");
    }
  }
  if (auto it = obj.find("source"); it != obj.end()) {
    if (it->is_string()) {
      model.source = it->get<std::string>();
    } else {
      r.problems.emplace_back("model.source: expected a string");
    }
  }
}

void read_bath(Reader& r, const json& obj, BathBlock& bath) {
  const std::string path = "bath";
  r.check_keys(obj, path,
               {"lambda_cm", "tau_c_fs", "gamma_per_fs", "temperature_K", "allow_low_temperature"});
  if (auto v = r.number(obj, "lambda_cm", path, true)) bath.lambda_cm = *v;
  bath.tau_c_fs = r.number(obj, "tau_c_fs", path, false);
  bath.gamma_per_fs = r.number(obj, "gamma_per_fs", path, false);
  // presence of exactly one rate key is checked with the other scalar fields
  if (auto v = r.number(obj, "temperature_K", path, false)) bath.temperature_K = *v;
  if (auto it = obj.find("allow_low_temperature"); it != obj.end()) {
    if (it->is_boolean()) {
      bath.allow_low_temperature = it->get<bool>();
    } else {
      r.problems.emplace_back("bath.allow_low_temperature: expected a boolean");
    }
  }
}

void read_hierarchy(Reader& r, const json& obj, HierarchyBlock& h) {
  const std::string path = "hierarchy";
  r.check_keys(obj, path, {"max_tier", "representation", "safety_factor", "omega_e"});
  if (auto v = r.integer(obj, "max_tier", path, true)) h.max_tier = *v;
  if (auto v = r.choice(obj, "representation", path, kRepresentations)) h.representation = *v;
  if (auto v = r.number(obj, "safety_factor", path, false)) h.safety_factor = *v;
  if (auto v = r.choice(obj, "omega_e", path, kOmegaRules)) h.omega_e = *v;
}

void read_integration(Reader& r, const json& obj, IntegrationBlock& in) {
  const std::string path = "integration";
  r.check_keys(obj, path, {"dt_fs", "t_end_fs", "sample_every"});
  if (auto v = r.number(obj, "dt_fs", path, false)) in.dt_fs = *v;
  if (auto v = r.number(obj, "t_end_fs", path, false)) in.t_end_fs = *v;
  if (auto v = r.integer(obj, "sample_every", path, false)) in.sample_every = *v;
}

const char* grid_key(ScanParameter p) {
  return p == ScanParameter::DissipationRate ? "grid_per_fs" : "grid_cm";
}

void read_scan(Reader& r, const json& obj, ScanBlock& scan) {
  const std::string path = "task.scan";
  if (auto v = r.choice(obj, "parameter", path, kScanParameters)) {
    scan.parameter = *v;
  } else if (!obj.contains("parameter")) {
    r.problems.push_back(path + ".parameter: missing");
  }
  const std::string grid = grid_key(scan.parameter);
  r.check_keys(obj, path,
               {"parameter", grid, "pair_mode", "correlation_times_fs", "t_end_fs", "threads"});
  if (auto v = r.numbers(obj, grid, path, true)) scan.grid = *v;
  if (auto v = r.choice(obj, "pair_mode", path, kPairModes)) scan.pair_mode = *v;
  if (auto v = r.numbers(obj, "correlation_times_fs", path, false)) scan.correlation_times_fs = *v;
  if (auto v = r.number(obj, "t_end_fs", path, false)) scan.t_end_fs = *v;
  if (auto v = r.integer(obj, "threads", path, false)) scan.threads = *v;
}

void read_task(Reader& r, const json& obj, TaskBlock& task) {
  const std::string path = "task";
  r.check_keys(obj, path, {"kind", "initial_sites", "correlation_times_fs", "optimize", "scan"});
  if (auto v = r.choice(obj, "kind", path, kTaskKinds)) task.kind = *v;
  if (auto it = obj.find("initial_sites"); it != obj.end()) {
    if (it->is_array() && it->size() == 2 && (*it)[0].is_number_integer() &&
        (*it)[1].is_number_integer()) {
      task.initial_sites = {(*it)[0].get<int>(), (*it)[1].get<int>()};
    } else {
      r.problems.emplace_back("task.initial_sites: expected two integer site labels");
    }
  }
  if (auto v = r.numbers(obj, "correlation_times_fs", path, false)) task.correlation_times_fs = *v;
  if (const json* opt = r.object(obj, "optimize", path, false)) {
    const std::string opath = "task.optimize";
    r.check_keys(*opt, opath, {"n_states", "max_tier", "t_end_fs"});
    if (auto v = r.integer(*opt, "n_states", opath, false)) task.optimize.n_states = *v;
    if (auto v = r.integer(*opt, "max_tier", opath, false)) task.optimize.max_tier = *v;
    if (auto v = r.number(*opt, "t_end_fs", opath, false)) task.optimize.t_end_fs = *v;
  }
  if (const json* scan = r.object(obj, "scan", path, false)) {
    task.scan.emplace();
    read_scan(r, *scan, *task.scan);
  }
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

}  // namespace

bool ModelBlock::operator==(const ModelBlock& other) const {
  return site_energies_cm == other.site_energies_cm && source == other.source &&
         couplings_cm.rows() == other.couplings_cm.rows() &&
         couplings_cm.cols() == other.couplings_cm.cols() && couplings_cm == other.couplings_cm;
}

namespace {

// Checks on individual values; meaningful even when the structure is broken.
std::vector<std::string> scalar_problems(const RunConfig& c) {
  std::vector<std::string> problems;
  if (c.schema_version != kSchemaVersion) {
    problems.push_back("schema_version " + std::to_string(c.schema_version) +
                       " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (c.bath.lambda_cm < 0.0) problems.emplace_back("bath.lambda_cm: must be non-negative");
  if (c.bath.tau_c_fs.has_value() == c.bath.gamma_per_fs.has_value()) {
    problems.emplace_back("bath: exactly one of tau_c_fs or gamma_per_fs must be set");
  }
  if (c.bath.tau_c_fs && !(*c.bath.tau_c_fs > 0.0)) {
    problems.emplace_back("bath.tau_c_fs: must be positive");
  }
  if (c.bath.gamma_per_fs && !(*c.bath.gamma_per_fs > 0.0)) {
    problems.emplace_back("bath.gamma_per_fs: must be positive");
  }
  if (!(c.bath.temperature_K > 0.0)) problems.emplace_back("bath.temperature_K: must be positive");
  if (c.hierarchy.max_tier < 0) problems.emplace_back("hierarchy.max_tier: must be non-negative");
  if (!(c.hierarchy.safety_factor >= 1.0)) {
    problems.emplace_back("hierarchy.safety_factor: must be >= 1");
  }
  if (!(c.integration.dt_fs > 0.0)) problems.emplace_back("integration.dt_fs: must be positive");
  if (!(c.integration.t_end_fs >= 0.0)) {
    problems.emplace_back("integration.t_end_fs: must be non-negative");
  }
  if (c.integration.sample_every < 1) {
    problems.emplace_back("integration.sample_every: must be >= 1");
  }
  return problems;
}

}  // namespace

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> problems = scalar_problems(c);
  const int n = static_cast<int>(c.model.site_energies_cm.size());
  // a negative lambda is reported once, by the bath check
  ExcitonModel model{c.model.site_energies_cm, c.model.couplings_cm,
                     c.bath.lambda_cm < 0.0 ? 0.0 : c.bath.lambda_cm};
  try {
    model.validate();
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) problems.push_back("model: " + p);
  }
  const auto& sites = c.task.initial_sites;
  if (sites[0] < 1 || sites[0] > n || sites[1] < 1 || sites[1] > n) {
    problems.push_back("task.initial_sites: labels must lie in 1.." + std::to_string(n));
  }
  for (double t : c.task.correlation_times_fs) {
    if (!(t > 0.0)) {
      problems.emplace_back("task.correlation_times_fs: values must be positive");
      break;
    }
  }
  if (c.task.optimize.n_states < 2) problems.emplace_back("task.optimize.n_states: must be >= 2");
  if (c.task.optimize.max_tier < 0) {
    problems.emplace_back("task.optimize.max_tier: must be non-negative");
  }
  if (!(c.task.optimize.t_end_fs >= 0.0)) {
    problems.emplace_back("task.optimize.t_end_fs: must be non-negative");
  }
  if (c.task.kind == TaskKind::Scan && !c.task.scan) {
    problems.emplace_back("task.scan: required when task.kind is scan");
  }
  if (c.task.scan) {
    const auto& s = *c.task.scan;
    if (s.grid.empty()) problems.emplace_back("task.scan.grid: must not be empty");
    if (!strictly_increasing(s.grid)) {
      problems.emplace_back("task.scan.grid: must be strictly increasing");
    }
    if (s.parameter == ScanParameter::DissipationRate) {
      for (double g : s.grid) {
        if (!(g > 0.0)) {
          problems.emplace_back("task.scan.grid_per_fs: rates must be positive");
          break;
        }
      }
    }
    if (s.parameter == ScanParameter::ReorganizationEnergy) {
      for (double l : s.grid) {
        if (l < 0.0) {
          problems.emplace_back("task.scan.grid_cm: reorganization energies must be non-negative");
          break;
        }
      }
    }
    if ((s.parameter == ScanParameter::Coupling || s.parameter == ScanParameter::SiteEnergyGap) &&
        n < 2) {
      problems.emplace_back("task.scan.parameter: needs at least two sites");
    }
    for (double t : s.correlation_times_fs) {
      if (!(t > 0.0)) {
        problems.emplace_back("task.scan.correlation_times_fs: values must be positive");
        break;
      }
    }
    if (!(s.t_end_fs >= 0.0)) problems.emplace_back("task.scan.t_end_fs: must be non-negative");
    if (s.threads < 1) problems.emplace_back("task.scan.threads: must be >= 1");
  }
  return problems;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("configuration root must be an object");

  Reader r;
  RunConfig c;
  r.check_keys(root, "config",
               {"schema_version", "model", "bath", "hierarchy", "integration", "task"});
  if (auto v = r.integer(root, "schema_version", "config", true)) c.schema_version = *v;
  if (const json* m = r.object(root, "model", "config", true)) read_model(r, *m, c.model);
  if (const json* b = r.object(root, "bath", "config", true)) read_bath(r, *b, c.bath);
  if (const json* h = r.object(root, "hierarchy", "config", true)) read_hierarchy(r, *h, c.hierarchy);
  if (const json* i = r.object(root, "integration", "config", false)) {
    read_integration(r, *i, c.integration);
  }
  if (const json* t = r.object(root, "task", "config", false)) read_task(r, *t, c.task);

  std::vector<std::string> problems = std::move(r.problems);
  // Cross-field checks only make sense once the structure is intact.
  auto semantic = problems.empty() ? validate_config(c) : scalar_problems(c);
  for (auto& p : semantic) {
    if (std::find(problems.begin(), problems.end(), p) == problems.end()) problems.push_back(std::move(p));
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

std::string serialize_config(const RunConfig& c, int indent) {
  json root;
  root["schema_version"] = c.schema_version;

  json model;
  model["site_energies_cm"] = c.model.site_energies_cm;
  json rows = json::array();
  for (Eigen::Index i = 0; i < c.model.couplings_cm.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < c.model.couplings_cm.cols(); ++j) row.push_back(c.model.couplings_cm(i, j));
    rows.push_back(row);
  }
  model["couplings_cm"] = rows;
  if (!c.model.source.empty()) model["source"] = c.model.source;
  root["model"] = model;

  json bath;
  bath["lambda_cm"] = c.bath.lambda_cm;
  if (c.bath.tau_c_fs) bath["tau_c_fs"] = *c.bath.tau_c_fs;
  if (c.bath.gamma_per_fs) bath["gamma_per_fs"] = *c.bath.gamma_per_fs;
  bath["temperature_K"] = c.bath.temperature_K;
  if (c.bath.allow_low_temperature) bath["allow_low_temperature"] = true;
  root["bath"] = bath;

  root["hierarchy"] = {{"max_tier", c.hierarchy.max_tier},
                       {"representation", to_string(c.hierarchy.representation)},
                       {"safety_factor", c.hierarchy.safety_factor},
                       {"omega_e", name_of(kOmegaRules, c.hierarchy.omega_e)}};
  root["integration"] = {{"dt_fs", c.integration.dt_fs},
                         {"t_end_fs", c.integration.t_end_fs},
                         {"sample_every", c.integration.sample_every}};

  json task;
  task["kind"] = to_string(c.task.kind);
  task["initial_sites"] = {c.task.initial_sites[0], c.task.initial_sites[1]};
  if (!c.task.correlation_times_fs.empty()) task["correlation_times_fs"] = c.task.correlation_times_fs;
  task["optimize"] = {{"n_states", c.task.optimize.n_states},
                      {"max_tier", c.task.optimize.max_tier},
                      {"t_end_fs", c.task.optimize.t_end_fs}};
  if (c.task.scan) {
    const auto& s = *c.task.scan;
    json scan;
    scan["parameter"] = to_string(s.parameter);
    scan[grid_key(s.parameter)] = s.grid;
    scan["pair_mode"] = to_string(s.pair_mode);
    if (!s.correlation_times_fs.empty()) scan["correlation_times_fs"] = s.correlation_times_fs;
    scan["t_end_fs"] = s.t_end_fs;
    scan["threads"] = s.threads;
    task["scan"] = scan;
  }
  root["task"] = task;
  if (indent < 0) return root.dump();
  return root.dump(indent) + "\n";
}

PhysicalSystem RunConfig::physical_system() const {
  return PhysicalSystem::make(model.site_energies_cm, model.couplings_cm, bath.lambda_cm,
                              bath.gamma(), bath.temperature_K);
}

PropagationSettings RunConfig::propagation_settings() const {
  PropagationSettings s;
  s.max_tier = hierarchy.max_tier;
  s.t_end_fs = integration.t_end_fs;
  s.dt_fs = integration.dt_fs;
  s.sample_every = integration.sample_every;
  s.representation = hierarchy.representation;
  return s;
}

OptimizeSettings RunConfig::optimize_settings() const {
  OptimizeSettings s;
  s.n_states = task.optimize.n_states;
  s.max_tier = task.optimize.max_tier;
  s.t_end_fs = task.optimize.t_end_fs;
  s.dt_fs = integration.dt_fs;
  s.sample_every = integration.sample_every;
  s.safety_factor = hierarchy.safety_factor;
  s.omega_rule = hierarchy.omega_e;
  return s;
}

std::string to_string(Representation r) { return name_of(kRepresentations, r); }
std::optional<ScanParameter> scan_parameter_from_string(const std::string& name) {
  for (const auto& entry : kScanParameters) {
    if (name == entry.name) return entry.value;
  }
  return std::nullopt;
}

std::string to_string(ScanParameter p) { return name_of(kScanParameters, p); }
std::string to_string(PairMode p) { return name_of(kPairModes, p); }
std::string to_string(TaskKind k) { return name_of(kTaskKinds, k); }

}  // namespace heomflow
