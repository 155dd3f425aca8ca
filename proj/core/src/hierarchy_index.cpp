#include "heomflow/hierarchy_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "heomflow/errors.hpp"

namespace heomflow {

namespace {

// Appends every composition of `remaining` into the slots [pos, n) in
// ascending lexicographic order.
void compose(std::vector<int>& current, int pos, int remaining, std::vector<int>& out) {
  const int n = static_cast<int>(current.size());
  if (pos == n - 1) {
    current[pos] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    current[pos] = v;
    compose(current, pos + 1, remaining - v, out);
  }
}

}  // namespace

std::optional<std::uint64_t> operator_count(int n_sites, int max_tier) {
  // C(n+L, n) = prod_{i=1..n} (L+i)/i, exact at every step.
  std::uint64_t result = 1;
  for (int i = 1; i <= n_sites; ++i) {
    const auto factor = static_cast<std::uint64_t>(max_tier) + static_cast<std::uint64_t>(i);
    const std::uint64_t g = std::gcd(result, static_cast<std::uint64_t>(i));
    const std::uint64_t reduced = result / g;
    const std::uint64_t divisor = static_cast<std::uint64_t>(i) / g;
    if (factor % divisor != 0) return std::nullopt;  // cannot happen for binomials
    const std::uint64_t f = factor / divisor;
    if (f != 0 && reduced > UINT64_MAX / f) return std::nullopt;
    result = reduced * f;
  }
  return result;
}

HierarchyIndexTable::HierarchyIndexTable(int n_sites, int max_tier, std::size_t operator_cap)
    : n_sites_(n_sites), max_tier_(max_tier) {
  if (n_sites < 1) throw ConfigError("hierarchy needs at least one site");
  if (max_tier < 0) throw ConfigError("max_tier must be non-negative");
  const auto count = operator_count(n_sites, max_tier);
  if (!count || *count > operator_cap) {
    throw ConfigError("hierarchy with " + std::to_string(n_sites) + " sites and max_tier " +
                      std::to_string(max_tier) + " exceeds the cap of " +
                      std::to_string(operator_cap) + " operators");
  }
  const auto total = static_cast<std::size_t>(*count);
  const auto n = static_cast<std::size_t>(n_sites);

  entries_.reserve(total * n);
  std::vector<int> current(n, 0);
  for (int t = 0; t <= max_tier; ++t) compose(current, 0, t, entries_);

  tiers_.resize(total);
  std::map<std::vector<int>, Ordinal> position;
  for (Ordinal k = 0; k < total; ++k) {
    auto row = entries(k);
    tiers_[k] = std::accumulate(row.begin(), row.end(), 0);
    position.emplace(std::vector<int>(row.begin(), row.end()), k);
  }

  raise_.assign(total * n, -1);
  lower_.assign(total * n, -1);
  std::vector<int> probe(n);
  for (Ordinal k = 0; k < total; ++k) {
    auto row = entries(k);
    for (std::size_t m = 0; m < n; ++m) {
      std::copy(row.begin(), row.end(), probe.begin());
      if (tiers_[k] < max_tier) {
        ++probe[m];
        raise_[k * n + m] = static_cast<std::int64_t>(position.at(probe));
        --probe[m];
      }
      if (row[m] > 0) {
        --probe[m];
        lower_[k * n + m] = static_cast<std::int64_t>(position.at(probe));
      }
    }
  }
}

std::optional<Ordinal> HierarchyIndexTable::find(std::span<const int> target) const {
  if (target.size() != static_cast<std::size_t>(n_sites_)) return std::nullopt;
  // Walk raise links from the origin; cost O(tier).
  Ordinal k = 0;
  for (int m = 0; m < n_sites_; ++m) {
    if (target[m] < 0) return std::nullopt;
    for (int step = 0; step < target[m]; ++step) {
      auto next = raise(k, m);
      if (!next) return std::nullopt;
      k = *next;
    }
  }
  return k;
}

HierarchyIndexTable enumerate_indices(int n_sites, int max_tier, std::size_t operator_cap) {
  return HierarchyIndexTable(n_sites, max_tier, operator_cap);
}

double characteristic_frequency(const ExcitonModel& model, CharacteristicFrequency rule) {
  if (rule == CharacteristicFrequency::MaxAbsCoupling) {
    return 2.0 * units::wavenumber_to_rad_per_fs(model.couplings_cm.cwiseAbs().maxCoeff());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_hamiltonian(model),
                                                         Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return ev.maxCoeff() - ev.minCoeff();
}

int required_depth(const ExcitonModel& model, const BathSpec& bath, double safety_factor,
                   CharacteristicFrequency rule) {
  if (!(safety_factor >= 1.0)) throw ConfigError("safety_factor must be >= 1");
  const double ratio = characteristic_frequency(model, rule) / bath.dissipation_rate_per_fs;
  // Absorb rounding noise so that an exact integer ratio is not bumped up.
  return static_cast<int>(std::ceil(safety_factor * ratio * (1.0 - 1e-12)));
}

bool validity_flag(int max_tier_used, const ExcitonModel& model, const BathSpec& bath,
                   double safety_factor, CharacteristicFrequency rule) {
  return max_tier_used >= required_depth(model, bath, safety_factor, rule);
}

}  // namespace heomflow
