#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "heomflow/measures.hpp"
#include "heomflow/propagator.hpp"
#include "heomflow/scan.hpp"

namespace heomflow::io {

// Every output file starts with '#' comment lines carrying the code version
// and the full configuration echo, followed by one comma-separated column
// header line. Numbers are written with 17 significant digits.
struct FileHeader {
  std::string config_json;  // compact JSON of the RunConfig, may be empty
  std::vector<std::string> notes;
};

std::string format_number(double value);

void write_trajectory(std::ostream& os, const Trajectory& traj, const FileHeader& header);
void write_series(std::ostream& os, const DistanceSeries& series, const FileHeader& header);
void write_scan(std::ostream& os, const ScanResult& result, const FileHeader& header);
// One file per sample: ordinal, multi-index entries, then Re/Im of every element.
void write_ado_snapshot(std::ostream& os, double time_fs, const HierarchyState& state,
                        const FileHeader& header);

// Every candidate pair of an optimization, 1-based candidate labels.
void write_pair_scores(std::ostream& os, const NMResult& result, const FileHeader& header);

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, const FileHeader& header);
void write_series(const std::filesystem::path& path, const DistanceSeries& series, const FileHeader& header);
void write_scan(const std::filesystem::path& path, const ScanResult& result, const FileHeader& header);

// Readers for the files above. Trajectories come back with system states only.
Trajectory read_trajectory(std::istream& is);
DistanceSeries read_series(std::istream& is);
ScanResult read_scan(std::istream& is);
DistanceSeries read_series(const std::filesystem::path& path);
ScanResult read_scan(const std::filesystem::path& path);

// N x N symmetric Hamiltonian in cm^-1; comment lines start with '#'. The
// diagonal becomes site energies, the off-diagonal couplings. The file must
// carry at least one comment line stating its provenance.
ModelBlock read_hamiltonian_csv(const std::filesystem::path& path);

}  // namespace heomflow::io
