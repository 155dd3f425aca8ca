#include <gtest/gtest.h>

#include <numeric>

#include "heomflow/errors.hpp"
#include "heomflow/hierarchy_index.hpp"
#include "support.hpp"

using namespace heomflow;

namespace {

// Nested loops over n_1..n_N with the running sum bounded by max_tier.
std::size_t brute_force_count(int sites, int budget) {
  if (sites == 0) return 1;
  std::size_t total = 0;
  for (int n = 0; n <= budget; ++n) total += brute_force_count(sites - 1, budget - n);
  return total;
}

std::vector<int> to_vec(std::span<const int> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(HierarchyIndex, PresetCounts) {
  HierarchyIndexTable dimer(2, 39);
  EXPECT_EQ(dimer.size(), 820u);
  EXPECT_EQ(dimer.ado_count(), 819u);
  HierarchyIndexTable fmo(7, 4);
  EXPECT_EQ(fmo.size(), 330u);
  EXPECT_EQ(fmo.ado_count(), 329u);
  HierarchyIndexTable lone(1, 0);
  EXPECT_EQ(lone.size(), 1u);
}

TEST(HierarchyIndex, CountMatchesNestedLoops) {
  for (int n = 1; n <= 8; ++n) {
    for (int l = 0; l <= 12; ++l) {
      const auto expected = brute_force_count(n, l);
      ASSERT_EQ(operator_count(n, l).value(), expected) << n << " " << l;
      ASSERT_EQ(enumerate_indices(n, l).size(), expected) << n << " " << l;
    }
  }
}

TEST(HierarchyIndex, OrderingIsTierMajorLexicographic) {
  const auto t = enumerate_indices(3, 5);
  for (int e : t.entries(0)) EXPECT_EQ(e, 0);
  for (Ordinal k = 0; k < t.size(); ++k) {
    const auto e = t.entries(k);
    EXPECT_EQ(std::accumulate(e.begin(), e.end(), 0), t.tier(k));
    for (int v : e) EXPECT_GE(v, 0);
    if (k == 0) continue;
    ASSERT_LE(t.tier(k - 1), t.tier(k));
    if (t.tier(k - 1) == t.tier(k)) EXPECT_LT(to_vec(t.entries(k - 1)), to_vec(e));
  }
}

TEST(HierarchyIndex, TruncationIsPrefix) {
  const auto small = enumerate_indices(3, 3);
  const auto big = enumerate_indices(3, 6);
  for (Ordinal k = 0; k < small.size(); ++k) EXPECT_EQ(to_vec(small.entries(k)), to_vec(big.entries(k)));
}

TEST(HierarchyIndex, AdjacencyRoundTrip) {
  for (auto [n, l] : {std::pair{2, 39}, std::pair{7, 4}, std::pair{4, 6}, std::pair{1, 9}}) {
    const auto t = enumerate_indices(n, l);
    for (Ordinal k = 0; k < t.size(); ++k) {
      for (int m = 0; m < n; ++m) {
        const auto up = t.raise(k, m);
        EXPECT_EQ(up.has_value(), t.tier(k) < l);
        if (up) {
          ASSERT_EQ(t.lower(*up, m), k);
          EXPECT_EQ(t.entries(*up)[m], t.entries(k)[m] + 1);
        }
        const auto down = t.lower(k, m);
        EXPECT_EQ(down.has_value(), t.entries(k)[m] > 0);
        if (down) ASSERT_EQ(t.raise(*down, m), k);
      }
      EXPECT_EQ(t.find(t.entries(k)), k);
    }
  }
}

TEST(HierarchyIndex, FindRejectsOutsiders) {
  const auto t = enumerate_indices(2, 3);
  const std::vector<int> too_deep{2, 2};
  EXPECT_FALSE(t.find(too_deep).has_value());
  const std::vector<int> wrong_size{1};
  EXPECT_FALSE(t.find(wrong_size).has_value());
}

TEST(HierarchyIndex, Deterministic) { EXPECT_EQ(enumerate_indices(4, 5), enumerate_indices(4, 5)); }

TEST(HierarchyIndex, CapAndBadArguments) {
  EXPECT_THROW(enumerate_indices(8, 30, 1000), ConfigError);
  EXPECT_THROW(enumerate_indices(0, 3), ConfigError);
  EXPECT_THROW(enumerate_indices(2, -1), ConfigError);
  EXPECT_FALSE(operator_count(200, 200).has_value());
}

TEST(Truncation, DimerEigenSpreadFromClosedForm) {
  const auto sys = test::dimer(20.0, 50.0);
  // eigenvalues of [[a, J], [J, b]] differ by sqrt((a-b)^2 + 4J^2)
  const double spread = std::sqrt(120.0 * 120.0 + 4.0 * 87.7 * 87.7) * test::kConv;
  EXPECT_NEAR(characteristic_frequency(sys.model), spread, 1e-12);
  EXPECT_NEAR(spread, 0.04003, 5e-5);
  EXPECT_EQ(required_depth(sys.model, sys.bath), 11);
  EXPECT_NEAR(characteristic_frequency(sys.model, CharacteristicFrequency::MaxAbsCoupling),
              2.0 * 87.7 * test::kConv, 1e-15);
}

TEST(Truncation, LimitsAndValidity) {
  auto sys = test::dimer(20.0, 50.0);
  EXPECT_TRUE(validity_flag(40, sys.model, sys.bath));
  EXPECT_FALSE(validity_flag(4, sys.model, sys.bath));
  EXPECT_TRUE(validity_flag(11, sys.model, sys.bath));
  EXPECT_FALSE(validity_flag(10, sys.model, sys.bath));

  BathSpec fast = sys.bath;
  fast.dissipation_rate_per_fs = 1e6;
  EXPECT_EQ(required_depth(sys.model, fast), 1);

  BathSpec matched = sys.bath;
  matched.dissipation_rate_per_fs = characteristic_frequency(sys.model);
  EXPECT_EQ(required_depth(sys.model, matched, 1.0), 1);
  EXPECT_THROW(required_depth(sys.model, matched, 0.5), ConfigError);

  // uncoupled degenerate sites need no hierarchy at all
  const auto flat = PhysicalSystem::make({0.0, 0.0}, Eigen::MatrixXd::Zero(2, 2), 20.0, 0.01, 288.0);
  EXPECT_EQ(required_depth(flat.model, flat.bath), 0);
  EXPECT_TRUE(validity_flag(0, flat.model, flat.bath));
}

TEST(Truncation, DepthFallsWithGamma) {
  const auto sys = test::dimer();
  int prev = 1 << 30;
  for (int tau = 200; tau >= 20; tau -= 10) {
    BathSpec b = sys.bath;
    b.dissipation_rate_per_fs = 1.0 / tau;
    const int d = required_depth(sys.model, b);
    EXPECT_LE(d, prev);
    prev = d;
  }
}
