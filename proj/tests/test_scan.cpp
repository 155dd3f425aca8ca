#include <gtest/gtest.h>

#include "heomflow/errors.hpp"
#include "heomflow/scan.hpp"
#include "support.hpp"

using namespace heomflow;

namespace {

ScanSpec small_spec(ScanParameter p, std::vector<double> grid, std::vector<double> taus) {
  ScanSpec spec;
  spec.base = dimer_preset();
  spec.base.hierarchy.max_tier = 12;
  spec.parameter = p;
  spec.grid = std::move(grid);
  spec.correlation_times_fs = std::move(taus);
  spec.t_end_fs = 600.0;
  return spec;
}

}  // namespace

TEST(Presets, Dimer) {
  const auto c = dimer_preset();
  EXPECT_TRUE(validate_config(c).empty());
  EXPECT_EQ(HierarchyIndexTable(2, c.hierarchy.max_tier).ado_count(), 819u);
  const auto h = build_hamiltonian(c.physical_system().model);
  EXPECT_NEAR(units::rad_per_fs_to_wavenumber(h(0, 0).real()), 20.0, 1e-12);
  EXPECT_NEAR(units::rad_per_fs_to_wavenumber(h(1, 1).real()), 140.0, 1e-12);
  EXPECT_NEAR(units::rad_per_fs_to_wavenumber(h(0, 1).real()), -87.7, 1e-12);
  EXPECT_EQ(c.integration.t_end_fs, 20000.0);
  EXPECT_EQ(c.task.initial_sites, (std::array<int, 2>{1, 2}));
  ASSERT_EQ(c.task.correlation_times_fs, (std::vector<double>{50.0, 100.0, 150.0}));
  for (double tau : c.task.correlation_times_fs) {
    const auto cfg = apply_scan_point(c, ScanParameter::ReorganizationEnergy, 20.0, tau);
    const auto check = high_temperature_check(cfg.physical_system().bath);
    EXPECT_TRUE(check.satisfied);
    EXPECT_LE(check.hbar_gamma_beta, 0.54);
  }
}

TEST(Presets, Fmo) {
  const auto c = fmo_preset();
  EXPECT_TRUE(validate_config(c).empty());
  EXPECT_EQ(HierarchyIndexTable(7, c.hierarchy.max_tier).ado_count(), 329u);
  EXPECT_EQ(c.hierarchy.representation, Representation::Normalized);
  const auto& m = c.model;
  EXPECT_EQ(m.couplings_cm.rows(), 7);
  EXPECT_TRUE(m.couplings_cm.isApprox(m.couplings_cm.transpose(), 0.0));
  EXPECT_EQ(m.site_energies_cm[1] - m.site_energies_cm[0], 120.0);
  EXPECT_EQ(m.couplings_cm(0, 1), -87.7);
  EXPECT_THROW(fmo_preset("/nonexistent/fmo.csv"), ConfigError);
}

TEST(Grids, Defaults) {
  const auto j = default_grid(ScanParameter::Coupling);
  ASSERT_EQ(j.size(), 21u);
  EXPECT_EQ(j.front(), -200.0);
  EXPECT_EQ(j.back(), 0.0);
  const auto gap = default_grid(ScanParameter::SiteEnergyGap);
  ASSERT_EQ(gap.size(), 21u);
  EXPECT_EQ(gap[6], 120.0);
  EXPECT_EQ(gap.back(), 400.0);
  const auto g = default_grid(ScanParameter::DissipationRate);
  ASSERT_EQ(g.size(), 19u);
  EXPECT_DOUBLE_EQ(1.0 / g.front(), 200.0);
  EXPECT_DOUBLE_EQ(1.0 / g.back(), 20.0);
  const auto l = default_grid(ScanParameter::ReorganizationEnergy);
  ASSERT_EQ(l.size(), 31u);
  EXPECT_EQ(l[2], 20.0);
  EXPECT_EQ(l.back(), 300.0);
  for (const auto& grid : {j, gap, g, l}) {
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GT(grid[i], grid[i - 1]);
  }
}

TEST(Grids, ValidityFlipsOnceAlongGamma) {
  for (const auto& base : {dimer_preset(), fmo_preset()}) {
    int flips = 0;
    bool prev = false;
    bool first = true;
    for (double g : default_grid(ScanParameter::DissipationRate)) {
      const auto cfg = apply_scan_point(base, ScanParameter::DissipationRate, g, 1.0 / g);
      const auto sys = cfg.physical_system();
      const bool v = validity_flag(cfg.hierarchy.max_tier, sys.model, sys.bath);
      if (!first && v != prev) {
        ++flips;
        EXPECT_TRUE(v);  // only ever false -> true
      }
      prev = v;
      first = false;
    }
    EXPECT_LE(flips, 1);
  }
}

TEST(Scan, ApplyPoint) {
  const auto base = dimer_preset();
  auto c = apply_scan_point(base, ScanParameter::Coupling, -50.0, 75.0);
  EXPECT_EQ(c.model.couplings_cm(0, 1), -50.0);
  EXPECT_EQ(c.model.couplings_cm(1, 0), -50.0);
  EXPECT_EQ(*c.bath.tau_c_fs, 75.0);
  c = apply_scan_point(base, ScanParameter::SiteEnergyGap, 300.0, 50.0);
  EXPECT_EQ(c.model.site_energies_cm[1], 300.0);
  c = apply_scan_point(base, ScanParameter::DissipationRate, 0.02, 50.0);
  EXPECT_FALSE(c.bath.tau_c_fs.has_value());
  EXPECT_EQ(*c.bath.gamma_per_fs, 0.02);
  c = apply_scan_point(base, ScanParameter::ReorganizationEnergy, 65.0, 150.0);
  EXPECT_EQ(c.bath.lambda_cm, 65.0);
  EXPECT_EQ(c.physical_system().model.reorganization_energy_cm, 65.0);
}

TEST(Scan, ZeroCouplingAndZeroLambdaGiveNoBackflow) {
  auto spec = small_spec(ScanParameter::Coupling, {-87.7, 0.0}, {150.0});
  auto r = run_scan(spec);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_GT(r.rows[0].nm_ity, 0.0);
  EXPECT_LT(r.rows[1].nm_ity, 1e-6);
  EXPECT_EQ(r.rows[1].pair_id, "1-2");
  EXPECT_EQ(r.rows[1].status, "ok");

  spec = small_spec(ScanParameter::ReorganizationEnergy, {0.0, 20.0}, {150.0});
  r = run_scan(spec);
  EXPECT_LT(r.rows[0].nm_ity, 1e-6);
  EXPECT_GT(r.rows[1].nm_ity, 0.0);
}

TEST(Scan, RowsOrderedAndDeterministic) {
  auto spec = small_spec(ScanParameter::ReorganizationEnergy, {10.0, 30.0, 60.0}, {50.0, 150.0});
  const auto one = run_scan(spec);
  ASSERT_EQ(one.rows.size(), 6u);
  EXPECT_EQ(one.rows[0].parameter, 10.0);
  EXPECT_EQ(one.rows[0].tau_c_fs, 50.0);
  EXPECT_EQ(one.rows[1].tau_c_fs, 150.0);
  EXPECT_EQ(one.rows[5].parameter, 60.0);
  spec.threads = 3;
  EXPECT_EQ(run_scan(spec), one);
  EXPECT_EQ(run_scan(spec), one);
}

TEST(Scan, DissipationRateOwnsTau) {
  auto spec = small_spec(ScanParameter::DissipationRate, {0.01, 0.02}, {150.0});
  const auto r = run_scan(spec);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.rows[0].tau_c_fs, 100.0);
  EXPECT_DOUBLE_EQ(r.rows[1].tau_c_fs, 50.0);
  EXPECT_GE(r.rows[0].nm_ity, r.rows[1].nm_ity);
}

TEST(Scan, ValidityAndWarnings) {
  auto spec = small_spec(ScanParameter::ReorganizationEnergy, {20.0}, {50.0, 150.0});
  std::vector<std::string> warnings;
  const auto r = run_scan(spec, [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_TRUE(r.rows[0].valid);   // needs 11 tiers
  EXPECT_FALSE(r.rows[1].valid);  // needs 31
  EXPECT_EQ(r.rows[1].max_tier, 12);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("tau_c=150"), std::string::npos);
}

TEST(Scan, BadSpecsThrow) {
  auto spec = small_spec(ScanParameter::ReorganizationEnergy, {20.0, 10.0}, {150.0});
  EXPECT_THROW(run_scan(spec), ConfigError);
  spec.grid = {};
  EXPECT_THROW(run_scan(spec), ConfigError);
  spec.grid = {20.0};
  spec.threads = 0;
  EXPECT_THROW(run_scan(spec), ConfigError);
}

TEST(Scan, HighTemperaturePolicy) {
  auto spec = small_spec(ScanParameter::ReorganizationEnergy, {20.0}, {10.0});
  spec.base.hierarchy.max_tier = 4;
  spec.base.bath.tau_c_fs = 10.0;  // hbar gamma beta ~ 2.7
  EXPECT_THROW(run_scan(spec), ConfigError);
  spec.base.bath.allow_low_temperature = true;
  std::vector<std::string> warnings;
  const auto r = run_scan(spec, [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_FALSE(r.rows[0].high_temperature);
  EXPECT_EQ(r.rows[0].status, "ok");
  EXPECT_FALSE(warnings.empty());
}

TEST(Scan, PointFailureIsRecorded) {
  // tau_c = 2 fs breaks the stability bound at dt = 1 fs, the other point is fine
  auto spec = small_spec(ScanParameter::ReorganizationEnergy, {20.0}, {2.0, 150.0});
  spec.base.bath.allow_low_temperature = true;
  std::vector<std::string> warnings;
  const auto r = run_scan(spec, [&](const std::string& w) { warnings.push_back(w); });
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].status.rfind("error: ", 0), 0u);
  EXPECT_TRUE(std::isnan(r.rows[0].nm_ity));
  EXPECT_EQ(r.rows[1].status, "ok");
}

TEST(Scan, OptimizedPairMode) {
  auto spec = small_spec(ScanParameter::ReorganizationEnergy, {20.0}, {150.0});
  spec.pair_mode = PairMode::Optimized;
  spec.base.task.optimize = OptimizeBlock{6, 8, 400.0};
  const auto r = run_scan(spec);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].max_tier, 8);
  EXPECT_FALSE(r.rows[0].pair_id.empty());
  EXPECT_GT(r.rows[0].nm_ity, 0.0);
}

TEST(Scan, FromConfigFallbacks) {
  auto c = dimer_preset();
  auto spec = ScanSpec::from_config(c);
  EXPECT_EQ(spec.grid, default_grid(ScanParameter::ReorganizationEnergy));
  EXPECT_EQ(spec.correlation_times_fs, c.task.correlation_times_fs);
  c.task.correlation_times_fs.clear();
  c.task.scan = ScanBlock{ScanParameter::Coupling, {-10.0, 0.0}, PairMode::FixedSitePair, {}, 1000.0, 2};
  spec = ScanSpec::from_config(c);
  EXPECT_EQ(spec.parameter, ScanParameter::Coupling);
  EXPECT_EQ(spec.grid, (std::vector<double>{-10.0, 0.0}));
  EXPECT_EQ(spec.correlation_times_fs, (std::vector<double>{100.0}));
  EXPECT_EQ(spec.t_end_fs, 1000.0);
  EXPECT_EQ(spec.threads, 2);
}

TEST(Scan, ShortHorizonMatchesLongHorizon) {
  // backflow happens within the first picosecond
  const auto c = dimer_preset();
  for (double tau : {50.0, 150.0}) {
    const auto cfg = apply_scan_point(c, ScanParameter::ReorganizationEnergy, 20.0, tau);
    const auto sys = cfg.physical_system();
    auto s = cfg.propagation_settings();
    const auto long_run = pair_trace_distance(site_projector(2, 0), site_projector(2, 1), sys.model, sys.bath, s);
    s.t_end_fs = 4000.0;
    const auto short_run = pair_trace_distance(site_projector(2, 0), site_projector(2, 1), sys.model, sys.bath, s);
    EXPECT_NEAR(nm_ity(short_run) / nm_ity(long_run), 1.0, 0.01) << tau;
  }
}
