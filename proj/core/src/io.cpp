#include "heomflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "heomflow/errors.hpp"
#include "heomflow/version.hpp"

namespace heomflow::io {

namespace {

const char* kind_name(SeriesKind kind) {
  return kind == SeriesKind::SystemTraceDistance ? "system_trace_distance" : "ado_distance";
}

void write_header(std::ostream& os, const FileHeader& header) {
  os << "# heomflow " << kVersion << "\n";
  if (!header.config_json.empty()) os << "# config: " << header.config_json << "\n";
  for (const auto& note : header.notes) os << "# " << note << "\n";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("trailing characters in number '" + text + "'");
  return v;
}

// Comment lines ("# key: value") and the data table that follows them.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta) {
      if (k == key) return v;
    }
    return {};
  }
};

Table read_table(std::istream& is) {
  Table t;
  std::string line;
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(": ");
      if (colon != std::string::npos && colon > 2) {
        t.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      }
      continue;
    }
    auto cells = split(line);
    if (!have_columns) {
      t.columns = std::move(cells);
      have_columns = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw ConfigError("row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_columns) throw ConfigError("file has no column header");
  return t;
}

void require_columns(const Table& t, const std::vector<std::string>& expected) {
  if (t.columns != expected) {
    std::string joined;
    for (const auto& c : expected) joined += (joined.empty() ? "" : ",") + c;
    throw ConfigError("unexpected columns, expected " + joined);
  }
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& body) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  body(os);
  os.flush();
  if (!os) throw ConfigError("failed writing '" + path.string() + "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  return is;
}

std::string sanitize(std::string text) {
  for (char& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return text;
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trajectory(std::ostream& os, const Trajectory& traj, const FileHeader& header) {
  write_header(os, header);
  const int n = traj.system_states.empty() ? traj.metadata.model.n_sites()
                                           : static_cast<int>(traj.system_states.front().rows());
  os << "time_fs";
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) os << ",re_" << j << "_" << k << ",im_" << j << "_" << k;
  }
  os << "\n";
  for (std::size_t i = 0; i < traj.times_fs.size(); ++i) {
    os << format_number(traj.times_fs[i]);
    const auto& rho = traj.system_states[i];
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        os << "," << format_number(rho(j, k).real()) << "," << format_number(rho(j, k).imag());
      }
    }
    os << "\n";
  }
}

void write_series(std::ostream& os, const DistanceSeries& series, const FileHeader& header) {
  write_header(os, header);
  os << "# kind: " << kind_name(series.kind) << "\n";
  os << "time_fs,D\n";
  for (std::size_t i = 0; i < series.times_fs.size(); ++i) {
    os << format_number(series.times_fs[i]) << "," << format_number(series.values[i]) << "\n";
  }
}

void write_scan(std::ostream& os, const ScanResult& result, const FileHeader& header) {
  write_header(os, header);
  os << "# parameter: " << to_string(result.parameter) << "\n";
  os << "parameter,tau_c_fs,nm_ity,valid,max_tier,pair_id,high_temperature,status\n";
  for (const auto& row : result.rows) {
    os << format_number(row.parameter) << "," << format_number(row.tau_c_fs) << ","
       << format_number(row.nm_ity) << "," << (row.valid ? 1 : 0) << "," << row.max_tier << ","
       << sanitize(row.pair_id) << "," << (row.high_temperature ? 1 : 0) << ","
       << sanitize(row.status) << "\n";
  }
}

void write_ado_snapshot(std::ostream& os, double time_fs, const HierarchyState& state,
                        const FileHeader& header) {
  write_header(os, header);
  os << "# time_fs: " << format_number(time_fs) << "\n";
  os << "# representation: " << to_string(state.representation()) << "\n";
  const int n = state.dim();
  os << "ordinal";
  for (int m = 1; m <= n; ++m) os << ",n_" << m;
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) os << ",re_" << j << "_" << k << ",im_" << j << "_" << k;
  }
  os << "\n";
  for (Ordinal o = 0; o < state.size(); ++o) {
    os << o;
    for (int e : state.table().entries(o)) os << "," << e;
    auto mat = state.matrix(o);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        os << "," << format_number(mat(j, k).real()) << "," << format_number(mat(j, k).imag());
      }
    }
    os << "\n";
  }
}

void write_pair_scores(std::ostream& os, const NMResult& result, const FileHeader& header) {
  write_header(os, header);
  os << "# best: " << result.pair_id << "\n";
  os << "first,second,theta_1,phi_1,theta_2,phi_2,nm_ity\n";
  for (const auto& p : result.per_pair) {
    const auto& a = result.candidates[static_cast<std::size_t>(p.first)];
    const auto& b = result.candidates[static_cast<std::size_t>(p.second)];
    os << p.first + 1 << "," << p.second + 1 << "," << format_number(a.theta) << ","
       << format_number(a.phi) << "," << format_number(b.theta) << "," << format_number(b.phi) << ","
       << format_number(p.value) << "\n";
  }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                      const FileHeader& header) {
  write_file(path, [&](std::ostream& os) { write_trajectory(os, traj, header); });
}

void write_series(const std::filesystem::path& path, const DistanceSeries& series,
                  const FileHeader& header) {
  write_file(path, [&](std::ostream& os) { write_series(os, series, header); });
}

void write_scan(const std::filesystem::path& path, const ScanResult& result, const FileHeader& header) {
  write_file(path, [&](std::ostream& os) { write_scan(os, result, header); });
}

Trajectory read_trajectory(std::istream& is) {
  const Table t = read_table(is);
  const auto cols = t.columns.size();
  if (cols < 3 || t.columns.front() != "time_fs" || (cols - 1) % 2 != 0) {
    throw ConfigError("not a trajectory file");
  }
  const auto elements = (cols - 1) / 2;
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(elements))));
  if (static_cast<std::size_t>(n * n) != elements) throw ConfigError("not a square density matrix");
  Trajectory traj;
  for (const auto& row : t.rows) {
    traj.times_fs.push_back(parse_double(row[0]));
    Eigen::MatrixXcd rho(n, n);
    std::size_t c = 1;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k, c += 2) rho(j, k) = {parse_double(row[c]), parse_double(row[c + 1])};
    }
    traj.system_states.push_back(std::move(rho));
  }
  return traj;
}

DistanceSeries read_series(std::istream& is) {
  const Table t = read_table(is);
  require_columns(t, {"time_fs", "D"});
  DistanceSeries s;
  const auto kind = t.meta_value("kind");
  if (kind == "ado_distance") {
    s.kind = SeriesKind::AdoDistance;
  } else if (kind == "system_trace_distance" || kind.empty()) {
    s.kind = SeriesKind::SystemTraceDistance;
  } else {
    throw ConfigError("unknown series kind '" + kind + "'");
  }
  for (const auto& row : t.rows) {
    s.times_fs.push_back(parse_double(row[0]));
    s.values.push_back(parse_double(row[1]));
  }
  return s;
}

ScanResult read_scan(std::istream& is) {
  const Table t = read_table(is);
  require_columns(t, {"parameter", "tau_c_fs", "nm_ity", "valid", "max_tier", "pair_id",
                      "high_temperature", "status"});
  ScanResult result;
  const auto param = t.meta_value("parameter");
  bool known = false;
  for (auto p : {ScanParameter::Coupling, ScanParameter::SiteEnergyGap,
                 ScanParameter::DissipationRate, ScanParameter::ReorganizationEnergy}) {
    if (to_string(p) == param) {
      result.parameter = p;
      known = true;
    }
  }
  if (!known) throw ConfigError("scan file does not name a known parameter");
  for (const auto& row : t.rows) {
    ScanRow r;
    r.parameter = parse_double(row[0]);
    r.tau_c_fs = parse_double(row[1]);
    r.nm_ity = parse_double(row[2]);
    r.valid = row[3] == "1";
    r.max_tier = std::stoi(row[4]);
    r.pair_id = row[5];
    r.high_temperature = row[6] == "1";
    r.status = row[7];
    result.rows.push_back(std::move(r));
  }
  return result;
}

DistanceSeries read_series(const std::filesystem::path& path) {
  auto is = open_input(path);
  return read_series(is);
}

ScanResult read_scan(const std::filesystem::path& path) {
  auto is = open_input(path);
  return read_scan(is);
}

ModelBlock read_hamiltonian_csv(const std::filesystem::path& path) {
  auto is = open_input(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::string provenance;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto start = line.find_first_not_of("# ");
      if (start != std::string::npos) {
        provenance += (provenance.empty() ? "" : " ") + line.substr(start);
      }
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      const auto first = cell.find_first_not_of(' ');
      const auto last = cell.find_last_not_of(' ');
      if (first == std::string::npos) throw ConfigError(path.string() + ": empty cell");
      row.push_back(parse_double(cell.substr(first, last - first + 1)));
    }
    rows.push_back(std::move(row));
  }
  if (provenance.empty()) {
    throw ConfigError(path.string() + ": a provenance comment line is required");
  }
  const auto n = rows.size();
  if (n == 0) throw ConfigError(path.string() + ": no matrix rows");
  ModelBlock model;
  model.site_energies_cm.resize(n);
  model.couplings_cm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& row : rows) {
    if (row.size() != n) throw ConfigError(path.string() + ": matrix is not square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rows[i][j] != rows[j][i]) {
        throw ConfigError(path.string() + ": matrix is not symmetric");
      }
      if (i == j) {
        model.site_energies_cm[i] = rows[i][j];
      } else {
        model.couplings_cm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
  }
  model.source = path.filename().string() + ": " + provenance;
  return model;
}

}  // namespace heomflow::io
