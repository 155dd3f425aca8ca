#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heomflow/units.hpp"

namespace heomflow {

// Ordinal of an operator in the hierarchy; 0 is always the system density matrix.
using Ordinal = std::size_t;

// Hierarchy index table for N sites truncated at max_tier = max sum(n_m).
//
// Ordering is tier-major and ascending lexicographic within a tier, so the
// operators of tiers 0..L form a prefix of the table for any L <= max_tier.
// Raise/lower adjacency is precomputed; a raise from the last tier is absent.
class HierarchyIndexTable {
 public:
  static constexpr std::size_t kDefaultOperatorCap = 1'000'000;

  HierarchyIndexTable(int n_sites, int max_tier, std::size_t operator_cap = kDefaultOperatorCap);

  int n_sites() const { return n_sites_; }
  int max_tier() const { return max_tier_; }
  std::size_t size() const { return tiers_.size(); }
  // Number of auxiliary operators, i.e. everything but the system slot.
  std::size_t ado_count() const { return size() - 1; }

  std::span<const int> entries(Ordinal k) const {
    return {entries_.data() + k * static_cast<std::size_t>(n_sites_),
            static_cast<std::size_t>(n_sites_)};
  }
  int tier(Ordinal k) const { return tiers_[k]; }

  std::optional<Ordinal> raise(Ordinal k, int site) const { return lookup(raise_, k, site); }
  std::optional<Ordinal> lower(Ordinal k, int site) const { return lookup(lower_, k, site); }

  // Ordinal of a multi-index, or nullopt if it is not in the table.
  std::optional<Ordinal> find(std::span<const int> entries) const;

  bool operator==(const HierarchyIndexTable& other) const = default;

 private:
  std::optional<Ordinal> lookup(const std::vector<std::int64_t>& adj, Ordinal k, int site) const {
    const auto v = adj[k * static_cast<std::size_t>(n_sites_) + static_cast<std::size_t>(site)];
    if (v < 0) return std::nullopt;
    return static_cast<Ordinal>(v);
  }

  int n_sites_;
  int max_tier_;
  std::vector<int> entries_;  // row-major size() x n_sites
  std::vector<int> tiers_;
  std::vector<std::int64_t> raise_;  // -1 when absent
  std::vector<std::int64_t> lower_;
};

// C(n_sites + max_tier, n_sites), or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> operator_count(int n_sites, int max_tier);

HierarchyIndexTable enumerate_indices(int n_sites, int max_tier,
                                      std::size_t operator_cap = HierarchyIndexTable::kDefaultOperatorCap);

// Which frequency of the system Liouvillian stands in for omega_e in the
// truncation rule.
enum class CharacteristicFrequency {
  EigenvalueSpread,  // max - min eigenvalue of H_e
  MaxAbsCoupling,    // 2 max |J_mn|
};

// omega_e in rad/fs.
double characteristic_frequency(const ExcitonModel& model,
                                CharacteristicFrequency rule = CharacteristicFrequency::EigenvalueSpread);

// ceil(safety_factor * omega_e / gamma).
int required_depth(const ExcitonModel& model, const BathSpec& bath, double safety_factor = 5.0,
                   CharacteristicFrequency rule = CharacteristicFrequency::EigenvalueSpread);

bool validity_flag(int max_tier_used, const ExcitonModel& model, const BathSpec& bath,
                   double safety_factor = 5.0,
                   CharacteristicFrequency rule = CharacteristicFrequency::EigenvalueSpread);

}  // namespace heomflow
