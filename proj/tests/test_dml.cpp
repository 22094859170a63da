#include "salix/dml.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "salix/rng.hpp"
#include "salix/stats.hpp"
#include "salix/synth.hpp"

using namespace salix;

namespace {

// n rows, groups of `group_size` consecutive rows, numeric columns by name,
// last one is the target.
Dataset make_grouped_dataset(const std::vector<std::pair<std::string, std::vector<double>>>& cols,
                             std::size_t group_size = 1) {
  Dataset ds;
  const std::size_t n = cols.front().second.size();
  Column drill;
  drill.spec = {"drill", ColumnKind::GroupKey, ""};
  for (std::size_t r = 0; r < n; ++r) drill.str.push_back("d" + std::to_string(r / group_size));
  drill.missing.assign(n, 0);
  ds.columns.push_back(std::move(drill));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    Column c;
    c.spec = {cols[i].first,
              i + 1 == cols.size() ? ColumnKind::Target : ColumnKind::Numeric, ""};
    c.num = cols[i].second;
    c.missing.assign(n, 0);
    ds.columns.push_back(std::move(c));
  }
  ds.weights.assign(n, 1.0);
  return ds;
}

}  // namespace

TEST(GroupFolds, RowsOfOneGroupShareAFold) {
  Rng rng(1);
  std::vector<double> y(60);
  for (auto& v : y) v = rng.normal();
  auto ds = make_grouped_dataset({{"y", y}}, 4);  // 15 groups of 4
  auto folds = detail::group_folds(ds, 5, 3);
  const auto groups = ds.group_values();
  std::map<std::string, std::set<int>> folds_per_group;
  for (std::size_t r = 0; r < folds.size(); ++r) folds_per_group[groups[r]].insert(folds[r]);
  for (const auto& [g, fs] : folds_per_group) EXPECT_EQ(fs.size(), 1u);
  std::set<int> used(folds.begin(), folds.end());
  EXPECT_EQ(used.size(), 5u);
}

TEST(Residualize, LinearFunctionLeavesZeroResiduals) {
  Rng rng(2);
  const std::size_t n = 300;
  std::vector<double> x1(n), x2(n), t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = rng.normal();
    x2[i] = rng.normal();
    t[i] = 2.0 * x1[i] - 0.5 * x2[i] + 1.0;  // exact linear function
    y[i] = rng.normal();
  }
  auto ds = make_grouped_dataset({{"x1", x1}, {"x2", x2}, {"t", t}, {"y", y}});
  auto res = residualize(ds, "t", {"x1", "x2"}, LinearSpec{}, 5, 1);
  for (double r : res) EXPECT_NEAR(r, 0.0, 1e-6);
}

TEST(Residualize, IndependentColumnKeepsItsVariance) {
  synth::LinearCausalSpec spec;
  spec.n = 2000;
  spec.p = 4;
  spec.seed = 11;
  auto data = synth::gen_linear_causal(spec);
  // a fresh independent column
  Rng rng(3);
  Column extra;
  extra.spec = {"noise", ColumnKind::Numeric, ""};
  extra.num.resize(data.dataset.n_rows());
  for (auto& v : extra.num) v = rng.normal(0, 2.0);
  extra.missing.assign(data.dataset.n_rows(), 0);
  data.dataset.columns.insert(data.dataset.columns.end() - 1, extra);

  auto res = residualize(data.dataset, "noise", data.covariates, LinearSpec{}, 5, 7);
  const double var_col = stats::variance(extra.num);
  const double var_res = stats::variance(res);
  EXPECT_NEAR(var_res / var_col, 1.0, 0.1);
}

TEST(Residualize, LeaveOneDrillOutBoundary) {
  Rng rng(4);
  const std::size_t n = 30;  // 10 drills of 3 rows
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = x[i] + rng.normal(0, 0.1);
  }
  auto ds = make_grouped_dataset({{"x", x}, {"y", y}}, 3);
  auto res = residualize(ds, "y", {"x"}, LinearSpec{}, 10, 5);
  EXPECT_EQ(res.size(), n);
}

TEST(Residualize, FewerGroupsThanFoldsIsError) {
  Rng rng(5);
  std::vector<double> x(12), y(12);
  for (std::size_t i = 0; i < 12; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  auto ds = make_grouped_dataset({{"x", x}, {"y", y}}, 4);  // only 3 groups
  EXPECT_THROW(residualize(ds, "y", {"x"}, LinearSpec{}, 5, 1), DataError);
}

// Honesty: a memorizing learner fits its training folds perfectly, so if
// residuals ever came from in-fold predictions they would collapse to zero.
TEST(Residualize, OutOfFoldPredictionsOnly) {
  Rng rng(6);
  const std::size_t n = 200;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(-3, 3);
    y[i] = rng.normal();  // pure noise: unlearnable out-of-fold
  }
  auto ds = make_grouped_dataset({{"x", x}, {"y", y}});
  TreeSpec memorizer{TreeParams{.max_depth = 30, .min_samples_leaf = 1}};
  auto res = residualize(ds, "y", {"x"}, memorizer, 5, 9);
  EXPECT_GT(stats::variance(res), 0.5 * stats::variance(y));
}

TEST(DmlEffect, ExactProportionalResiduals) {
  Rng rng(7);
  const std::size_t n = 120;
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = rng.normal();
    y[i] = 3.5 * t[i];  // exact, no covariate influence
  }
  auto ds = make_grouped_dataset({{"t", t}, {"y", y}});
  DmlOptions opts;
  opts.k_folds = 4;
  auto est = dml_effect(ds, "t", "y", {}, LinearSpec{}, opts);
  EXPECT_NEAR(est.theta, 3.5, 1e-9);
  EXPECT_NEAR(est.stderror, 0.0, 1e-9);
  EXPECT_LT(est.p_value, 1e-10);
}

TEST(DmlEffect, RecoversPlantedEffect) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    synth::LinearCausalSpec spec;
    spec.n = 800;
    spec.p = 4;
    spec.theta = 2.0;
    spec.seed = 100 + seed;
    auto data = synth::gen_linear_causal(spec);
    DmlOptions opts;
    opts.seed = seed;
    auto est = dml_effect(data.dataset, data.treatment, data.outcome, data.covariates,
                          LinearSpec{}, opts);
    if (std::fabs(est.theta - 2.0) <= 2.0 * est.stderror) ++hits;
  }
  EXPECT_GE(hits, 8);
}

TEST(DmlEffect, NullEffectRarelySignificant) {
  int non_significant = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    synth::LinearCausalSpec spec;
    spec.n = 800;
    spec.p = 4;
    spec.theta = 0.0;
    spec.seed = 300 + seed;
    auto data = synth::gen_linear_causal(spec);
    DmlOptions opts;
    opts.seed = seed;
    auto est = dml_effect(data.dataset, data.treatment, data.outcome, data.covariates,
                          LinearSpec{}, opts);
    if (est.p_value > 0.05) ++non_significant;
  }
  EXPECT_GE(non_significant, 8);
}

TEST(DmlEffect, NoiselessOutcomeIdentifiesExactly) {
  synth::LinearCausalSpec spec;
  spec.n = 400;
  spec.p = 3;
  spec.theta = 1.75;
  spec.y_noise_sd = 0.0;  // outcome exactly theta*T + X beta
  spec.seed = 21;
  auto data = synth::gen_linear_causal(spec);
  DmlOptions opts;
  opts.seed = 4;
  auto est =
      dml_effect(data.dataset, data.treatment, data.outcome, data.covariates, LinearSpec{}, opts);
  EXPECT_NEAR(est.theta, 1.75, 1e-6);
}

TEST(DmlEffect, AffineTreatmentEquivariance) {
  synth::LinearCausalSpec spec;
  spec.n = 500;
  spec.p = 3;
  spec.theta = 1.2;
  spec.seed = 31;
  auto data = synth::gen_linear_causal(spec);
  DmlOptions opts;
  opts.seed = 8;
  auto base =
      dml_effect(data.dataset, data.treatment, data.outcome, data.covariates, LinearSpec{}, opts);

  const double a = 4.0;
  Dataset scaled = data.dataset;
  for (auto& v : scaled.columns[static_cast<std::size_t>(scaled.find_column("t"))].num) v *= a;
  auto rescaled =
      dml_effect(scaled, data.treatment, data.outcome, data.covariates, LinearSpec{}, opts);

  EXPECT_NEAR(rescaled.theta, base.theta / a, 1e-9 * std::fabs(base.theta));
  EXPECT_NEAR(rescaled.t_stat, base.t_stat, 1e-9);
  EXPECT_NEAR(rescaled.p_value, base.p_value, 1e-9);
}

TEST(DmlEffect, OutcomeTranslationInvariance) {
  synth::LinearCausalSpec spec;
  spec.n = 500;
  spec.p = 3;
  spec.theta = 0.8;
  spec.seed = 41;
  auto data = synth::gen_linear_causal(spec);
  DmlOptions opts;
  opts.seed = 2;
  auto base =
      dml_effect(data.dataset, data.treatment, data.outcome, data.covariates, LinearSpec{}, opts);

  Dataset shifted = data.dataset;
  for (auto& v : shifted.columns[static_cast<std::size_t>(shifted.find_column("cl_mg_l"))].num)
    v += 5.0;
  auto moved =
      dml_effect(shifted, data.treatment, data.outcome, data.covariates, LinearSpec{}, opts);
  EXPECT_NEAR(moved.theta, base.theta, 1e-9);
}

TEST(DmlEffect, MatchesFullOlsOnLinearGaussian) {
  synth::LinearCausalSpec spec;
  spec.n = 1500;
  spec.p = 4;
  spec.theta = 2.0;
  spec.seed = 51;
  auto data = synth::gen_linear_causal(spec);
  DmlOptions opts;
  opts.seed = 3;
  auto est =
      dml_effect(data.dataset, data.treatment, data.outcome, data.covariates, LinearSpec{}, opts);

  // multiple regression of Y on [T, X]
  std::vector<std::string> cols = {"t"};
  cols.insert(cols.end(), data.covariates.begin(), data.covariates.end());
  FeatureMatrix x = detail::covariate_matrix(data.dataset, cols);
  auto ols = fit_linear(x, data.dataset.target_values(), data.dataset.weights);
  const double ols_theta = dynamic_cast<const LinearModel&>(*ols).coefficients()[0];
  EXPECT_NEAR(est.theta, ols_theta, 2.0 * est.stderror);
}

TEST(DmlEffect, DegenerateTreatmentIsError) {
  Rng rng(8);
  const std::size_t n = 200;
  std::vector<double> x(n), t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    t[i] = 2.0 * x[i];  // treatment fully explained by the covariate
    y[i] = rng.normal();
  }
  auto ds = make_grouped_dataset({{"x", x}, {"t", t}, {"y", y}});
  EXPECT_THROW(dml_effect(ds, "t", "y", {"x"}, LinearSpec{}, DmlOptions{}), NumericError);
}

TEST(DmlScan, PlantedDirectEffectsRankAndSign) {
  Rng rng(9);
  const std::size_t n = 600;
  std::vector<double> x1(n), x2(n), x3(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = rng.normal();
    x2[i] = rng.normal();
    x3[i] = rng.normal();
    y[i] = 2.0 * x1[i] - 1.2 * x2[i] + rng.normal(0, 0.5);
  }
  auto ds = make_grouped_dataset({{"x1", x1}, {"x2", x2}, {"x3", x3}, {"y", y}});
  DmlOptions opts;
  opts.seed = 17;
  auto scan = dml_scan(ds, "y", LinearSpec{}, opts);
  ASSERT_EQ(scan.size(), 3u);
  EXPECT_EQ(scan[0].treatment, "x1");  // largest |theta| first
  EXPECT_GT(scan[0].theta, 0);
  EXPECT_TRUE(scan[0].significant);
  EXPECT_EQ(scan[1].treatment, "x2");
  EXPECT_LT(scan[1].theta, 0);
  EXPECT_TRUE(scan[1].significant);
  EXPECT_EQ(scan[2].treatment, "x3");
  EXPECT_FALSE(scan[2].significant);
}

TEST(DmlScan, SinglePredictorDegeneratesToCentering) {
  Rng rng(10);
  const std::size_t n = 150;
  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = rng.normal();
    y[i] = 1.5 * t[i] + rng.normal(0, 0.2);
  }
  auto ds = make_grouped_dataset({{"t", t}, {"y", y}});
  auto scan = dml_scan(ds, "y", LinearSpec{}, DmlOptions{});
  ASSERT_EQ(scan.size(), 1u);
  EXPECT_TRUE(scan[0].error.empty());
  EXPECT_NEAR(scan[0].theta, 1.5, 0.15);
}

TEST(DmlScan, PerTreatmentErrorsRecordedAndScanContinues) {
  Rng rng(11);
  const std::size_t n = 200;
  std::vector<double> x(n), dup(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    dup[i] = x[i];  // duplicated: each is fully explained by the other
    y[i] = x[i] + rng.normal(0, 0.3);
  }
  auto ds = make_grouped_dataset({{"x", x}, {"dup", dup}, {"y", y}});
  auto scan = dml_scan(ds, "y", LinearSpec{}, DmlOptions{});
  ASSERT_EQ(scan.size(), 2u);
  int n_errors = 0;
  for (const auto& e : scan)
    if (!e.error.empty()) ++n_errors;
  EXPECT_EQ(n_errors, 2);  // both treatments degenerate, both recorded
}

TEST(DmlScan, MarkdownAndJsonShapes) {
  Rng rng(12);
  const std::size_t n = 200;
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = rng.normal();
    x2[i] = rng.normal();
    y[i] = x1[i] + rng.normal(0, 0.4);
  }
  auto ds = make_grouped_dataset({{"x1", x1}, {"x2", x2}, {"y", y}});
  auto scan = dml_scan(ds, "y", LinearSpec{}, DmlOptions{});
  auto j = dml_scan_to_json(scan);
  EXPECT_EQ(j.size(), 2u);
  EXPECT_TRUE(j[0].contains("theta"));
  auto md = dml_scan_to_markdown(scan);
  EXPECT_NE(md.find("| treatment |"), std::string::npos);
  EXPECT_NE(md.find("x1"), std::string::npos);
}
