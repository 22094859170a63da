#include "salix/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "salix/dml.hpp"
#include "salix/preprocess.hpp"
#include "salix/rng.hpp"

using namespace salix;

TEST(GenLinearCausal, DeterministicCsvBytes) {
  synth::LinearCausalSpec spec;
  spec.n = 100;
  spec.seed = 5;
  auto a = synth::gen_linear_causal(spec);
  auto b = synth::gen_linear_causal(spec);
  std::ostringstream csv_a, csv_b;
  write_csv(a.dataset, csv_a);
  write_csv(b.dataset, csv_b);
  EXPECT_EQ(csv_a.str(), csv_b.str());
  EXPECT_EQ(a.truth.gamma, b.truth.gamma);
}

TEST(GenLinearCausal, ShapeAndKeys) {
  synth::LinearCausalSpec spec;
  spec.n = 120;
  spec.p = 3;
  auto data = synth::gen_linear_causal(spec);
  EXPECT_EQ(data.dataset.n_rows(), 120u);
  EXPECT_GE(data.dataset.find_column("t"), 0);
  EXPECT_GE(data.dataset.group_key_index(), 0);
  EXPECT_EQ(data.covariates.size(), 3u);
  EXPECT_EQ(data.dataset.target_index(), data.dataset.find_column("cl_mg_l"));
}

TEST(GenLinearCausal, RejectsTinySpecs) {
  synth::LinearCausalSpec spec;
  spec.n = 10;
  EXPECT_THROW(synth::gen_linear_causal(spec), ConfigError);
}

TEST(Ishigami, ZeroAtOrigin) {
  auto oracle = synth::gen_ishigami();
  EXPECT_DOUBLE_EQ(oracle.eval(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(oracle.model->predict_row({0, 0, 0}), 0.0);
}

TEST(Ishigami, AnalyticRecordMatchesKnownValues) {
  auto oracle = synth::gen_ishigami();
  EXPECT_NEAR(oracle.analytic_s1[0], 0.3139, 5e-4);
  EXPECT_NEAR(oracle.analytic_s1[1], 0.4424, 5e-4);
  EXPECT_DOUBLE_EQ(oracle.analytic_s1[2], 0.0);
  EXPECT_NEAR(oracle.analytic_st[0], 0.5576, 5e-4);
  EXPECT_NEAR(oracle.analytic_st[1], 0.4424, 5e-4);
  EXPECT_NEAR(oracle.analytic_st[2], 0.2437, 5e-4);
  // feature 2 has no interaction terms
  EXPECT_DOUBLE_EQ(oracle.analytic_st[1], oracle.analytic_s1[1]);
}

// Independent Monte Carlo variance decomposition with plain (non-quasi)
// sampling and directly coded estimators; the analytic record must agree
// within +-0.01 at 1e6 base samples.
TEST(Ishigami, MonteCarloOracleAgreesWithAnalyticRecord) {
  auto oracle = synth::gen_ishigami();
  const std::size_t n = 1000000;
  Rng rng(123);
  const double pi = std::numbers::pi;

  std::vector<std::array<double, 3>> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) {
      a[i][static_cast<std::size_t>(d)] = rng.uniform(-pi, pi);
      b[i][static_cast<std::size_t>(d)] = rng.uniform(-pi, pi);
    }

  std::vector<double> fa(n), fb(n);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = oracle.eval(a[i][0], a[i][1], a[i][2]);
    fb[i] = oracle.eval(b[i][0], b[i][1], b[i][2]);
  }
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += fa[i] + fb[i];
  mean /= static_cast<double>(2 * n);
  double var = 0;
  for (std::size_t i = 0; i < n; ++i)
    var += (fa[i] - mean) * (fa[i] - mean) + (fb[i] - mean) * (fb[i] - mean);
  var /= static_cast<double>(2 * n);

  for (int d = 0; d < 3; ++d) {
    double acc1 = 0, acct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto mixed = a[i];
      mixed[static_cast<std::size_t>(d)] = b[i][static_cast<std::size_t>(d)];
      const double fm = oracle.eval(mixed[0], mixed[1], mixed[2]);
      acc1 += fb[i] * (fm - fa[i]);
      acct += (fa[i] - fm) * (fa[i] - fm);
    }
    const double s1 = acc1 / (static_cast<double>(n) * var);
    const double st = acct / (2.0 * static_cast<double>(n) * var);
    EXPECT_NEAR(s1, oracle.analytic_s1[static_cast<std::size_t>(d)], 0.01) << "d=" << d;
    EXPECT_NEAR(st, oracle.analytic_st[static_cast<std::size_t>(d)], 0.01) << "d=" << d;
  }
}

TEST(GenHydro, ShapeAndSchema) {
  synth::SynthSpec spec;
  spec.n_drills = 40;
  spec.years_per_drill = 5;
  spec.basin_sizes = {16, 12, 6, 4, 2};
  spec.seed = 1;
  auto data = synth::gen_hydro(spec);
  const Dataset& ds = data.dataset;
  EXPECT_EQ(ds.n_rows(), 200u);
  EXPECT_GE(ds.find_column("twi"), 0);
  EXPECT_GE(ds.find_column("precip_mm"), 0);
  EXPECT_GE(ds.find_column("lulc"), 0);
  EXPECT_GE(ds.find_column("basin"), 0);
  EXPECT_EQ(ds.columns[static_cast<std::size_t>(ds.find_column("lulc"))].spec.kind,
            ColumnKind::Categorical);
  EXPECT_GE(ds.group_key_index(), 0);
  EXPECT_GE(ds.time_key_index(), 0);
  EXPECT_GE(ds.target_index(), 0);
  validate_schema(dataset_schema(ds));
}

TEST(GenHydro, DeterministicCsvBytes) {
  synth::SynthSpec spec;
  spec.n_drills = 30;
  spec.years_per_drill = 4;
  spec.basin_sizes = {10, 8, 6, 4, 2};
  spec.seed = 9;
  auto a = synth::gen_hydro(spec);
  auto b = synth::gen_hydro(spec);
  std::ostringstream ca, cb;
  write_csv(a.dataset, ca);
  write_csv(b.dataset, cb);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(GenHydro, InjectsMissingAndOutliers) {
  synth::SynthSpec spec;
  spec.n_drills = 60;
  spec.years_per_drill = 10;
  spec.basin_sizes = {24, 18, 9, 6, 3};
  spec.seed = 3;
  auto data = synth::gen_hydro(spec);
  const Dataset& ds = data.dataset;

  std::size_t missing = 0, cells = 0;
  for (const auto& c : ds.columns) {
    if (c.spec.kind != ColumnKind::Numeric) continue;
    for (auto m : c.missing) {
      missing += m;
      ++cells;
    }
  }
  const double rate = static_cast<double>(missing) / static_cast<double>(cells);
  EXPECT_NEAR(rate, 0.02, 0.01);

  std::size_t above = 0;
  for (double v : ds.target_values())
    if (v > 4000) ++above;
  EXPECT_GT(above, 0u);
  EXPECT_LT(above, 20u);
}

TEST(GenHydro, BasinSizesMustSumToDrills) {
  synth::SynthSpec spec;
  spec.n_drills = 10;
  spec.basin_sizes = {5, 3};
  EXPECT_THROW(synth::gen_hydro(spec), ConfigError);
}

TEST(GenHydro, NoiselessLinearEffectsRecoverable) {
  synth::SynthSpec spec;
  spec.n_drills = 60;
  spec.years_per_drill = 6;
  spec.basin_sizes = {20, 15, 12, 8, 5};
  spec.noise_sd = 0.0;
  spec.missing_rate = 0.0;
  spec.outlier_rows = 0;
  spec.seed = 7;
  spec.effects = {
      {"twi", 80.0, synth::EffectForm::Linear, ""},
      {"precip_mm", -60.0, synth::EffectForm::Linear, ""},
      {"max_temp_c", 50.0, synth::EffectForm::Linear, ""},
  };
  auto data = synth::gen_hydro(spec);
  auto x = data.dataset.feature_matrix();
  auto model = fit_linear(x, data.dataset.target_values(), data.dataset.weights);
  const auto& lin = dynamic_cast<const LinearModel&>(*model);

  // planted coefficient per standardized unit = raw slope * generator scale
  const std::map<std::string, double> expected = {
      {"twi", 80.0 / 2.5}, {"precip_mm", -60.0 / 170.0}, {"max_temp_c", 50.0 / 4.0}};
  for (std::size_t j = 0; j < x.names.size(); ++j) {
    auto it = expected.find(x.names[j]);
    const double want = it == expected.end() ? 0.0 : it->second;
    EXPECT_NEAR(lin.coefficients()[j], want, 1e-6) << x.names[j];
  }
}

// Planted linear effects with |coef| >= 3 * noise_sd keep their sign through
// the DML scan; the named inert columns stay non-significant.
TEST(GenHydro, DmlScanRecoversPlantedSignsAcrossSeeds) {
  const std::vector<std::string> strong = {"twi", "precip_mm", "max_temp_c"};
  std::map<std::string, int> sign_hits;
  std::map<std::string, int> inert_quiet{{"fishponds_per_km2", 0}, {"factories_per_km2", 0}};
  const int n_seeds = 20;

  for (int seed = 0; seed < n_seeds; ++seed) {
    synth::SynthSpec spec;
    spec.n_drills = 50;
    spec.years_per_drill = 8;
    spec.basin_sizes = {20, 12, 9, 6, 3};
    spec.noise_sd = 40.0;
    spec.missing_rate = 0.0;
    spec.outlier_rows = 0;
    spec.seed = 1000 + static_cast<std::uint64_t>(seed);
    spec.effects = {
        {"twi", 200.0, synth::EffectForm::Linear, ""},
        {"precip_mm", -150.0, synth::EffectForm::Linear, ""},
        {"max_temp_c", 130.0, synth::EffectForm::Linear, ""},
    };
    auto data = synth::gen_hydro(spec);
    DmlOptions opts;
    opts.seed = static_cast<std::uint64_t>(seed);
    auto scan = dml_scan(data.dataset, "cl_mg_l", LinearSpec{}, opts);

    std::map<std::string, const CausalEstimate*> by_name;
    for (const auto& e : scan) by_name[e.treatment] = &e;
    if (by_name["twi"]->theta > 0 && by_name["twi"]->significant) ++sign_hits["twi"];
    if (by_name["precip_mm"]->theta < 0 && by_name["precip_mm"]->significant)
      ++sign_hits["precip_mm"];
    if (by_name["max_temp_c"]->theta > 0 && by_name["max_temp_c"]->significant)
      ++sign_hits["max_temp_c"];
    for (auto& [name, count] : inert_quiet)
      if (!by_name[name]->significant) ++count;
  }
  for (const auto& f : strong) EXPECT_GE(sign_hits[f], 18) << f;
  for (const auto& [name, count] : inert_quiet) EXPECT_GE(count, 17) << name;
}

// On standardized features the strongest planted driver tops the scan.
TEST(GenHydro, StandardizedScanPutsStrongestDriverFirst) {
  synth::SynthSpec spec;
  spec.n_drills = 50;
  spec.years_per_drill = 8;
  spec.basin_sizes = {20, 12, 9, 6, 3};
  spec.noise_sd = 40.0;
  spec.missing_rate = 0.0;
  spec.outlier_rows = 0;
  spec.seed = 77;
  spec.effects = {
      {"twi", 200.0, synth::EffectForm::Linear, ""},
      {"precip_mm", -150.0, synth::EffectForm::Linear, ""},
      {"max_temp_c", 130.0, synth::EffectForm::Linear, ""},
  };
  auto data = synth::gen_hydro(spec);
  Dataset ds = one_hot_encode(data.dataset, {"lulc"});
  ds = drop_low_variance(ds);
  ds = standardize(ds).first;
  DmlOptions opts;
  opts.seed = 5;
  auto scan = dml_scan(ds, "cl_mg_l", LinearSpec{}, opts);
  const CausalEstimate* first_significant = nullptr;
  for (const auto& e : scan)
    if (e.error.empty() && e.significant) {
      first_significant = &e;
      break;
    }
  ASSERT_NE(first_significant, nullptr);
  EXPECT_EQ(first_significant->treatment, "twi");  // largest significant |theta|
  EXPECT_GT(first_significant->theta, 0);
  std::map<std::string, const CausalEstimate*> by_name;
  for (const auto& e : scan) by_name[e.treatment] = &e;
  EXPECT_LT(by_name["precip_mm"]->theta, 0);
  EXPECT_TRUE(by_name["precip_mm"]->significant);
}

TEST(GenHydro, TopDriversAreTheLargestPlantedEffects) {
  synth::SynthSpec spec;
  spec.n_drills = 20;
  spec.years_per_drill = 3;
  spec.basin_sizes = {8, 6, 3, 2, 1};
  auto data = synth::gen_hydro(spec);
  ASSERT_GE(data.top_drivers.size(), 3u);
  EXPECT_EQ(data.top_drivers[0], "twi");
  const std::set<std::string> top3(data.top_drivers.begin(), data.top_drivers.begin() + 3);
  EXPECT_TRUE(top3.count("precip_mm"));
  EXPECT_TRUE(top3.count("max_temp_c"));
  auto j = data.truth.to_json();
  EXPECT_EQ(j.at("kind"), "hydro");
  EXPECT_TRUE(j.contains("effects"));
}
