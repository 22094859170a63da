#include "salix/models.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "salix/rng.hpp"

using namespace salix;

namespace {

FeatureMatrix make_matrix(std::vector<std::string> names, std::vector<std::vector<double>> cols) {
  FeatureMatrix m;
  m.names = std::move(names);
  m.n_rows = cols.front().size();
  m.data.resize(m.n_rows * cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t r = 0; r < m.n_rows; ++r) m.at(r, j) = cols[j][r];
  return m;
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

// Nonlinear regression fixture: smooth signal plus interaction, mild noise.
struct NonlinearFixture {
  FeatureMatrix x;
  std::vector<double> y;
  std::vector<double> w;
  std::vector<std::size_t> train, valid;
};

NonlinearFixture nonlinear_fixture(std::uint64_t seed, std::size_t n = 500) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(5, std::vector<double>(n));
  for (auto& c : cols)
    for (auto& v : c) v = rng.uniform(-2, 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 3.0 * std::sin(1.5 * cols[0][i]) + 2.0 * cols[1][i] * cols[1][i] +
           1.5 * cols[0][i] * cols[2][i] + rng.normal(0, 0.3);
  }
  NonlinearFixture f;
  f.x = make_matrix({"a", "b", "c", "d", "e"}, cols);
  f.y = std::move(y);
  f.w = ones(n);
  for (std::size_t i = 0; i < n; ++i) (i % 5 == 4 ? f.valid : f.train).push_back(i);
  return f;
}

double valid_r2(const Model& model, const NonlinearFixture& f) {
  FeatureMatrix xv = f.x.select_rows(f.valid);
  std::vector<double> yv;
  for (auto r : f.valid) yv.push_back(f.y[r]);
  auto rep = evaluate(yv, model.predict(xv));
  return rep.r2.value_or(-1e9);
}

}  // namespace

TEST(FitLinear, ExactLine) {
  auto x = make_matrix({"x"}, {{0, 1, 2, 3, 4}});
  std::vector<double> y = {1, 4, 7, 10, 13};  // 3x + 1
  auto model = fit_linear(x, y, ones(5));
  const auto& lin = dynamic_cast<const LinearModel&>(*model);
  EXPECT_NEAR(lin.intercept(), 1.0, 1e-8);
  EXPECT_NEAR(lin.coefficients()[0], 3.0, 1e-8);
}

TEST(FitLinear, ConstantTarget) {
  std::vector<double> xs(100);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i) * 0.1;
  auto x = make_matrix({"x"}, {xs});
  auto model = fit_linear(x, std::vector<double>(100, 5.0), ones(100));
  const auto& lin = dynamic_cast<const LinearModel&>(*model);
  EXPECT_NEAR(lin.intercept(), 5.0, 1e-8);
  EXPECT_NEAR(lin.coefficients()[0], 0.0, 1e-8);
}

TEST(FitLinear, WeightTwoEqualsDuplicatedRow) {
  auto xw = make_matrix({"x", "z"}, {{0, 1, 2, 3}, {1, -1, 0.5, 2}});
  std::vector<double> yw = {1, 2, 2.5, 5};
  std::vector<double> w = {1, 2, 1, 1};

  auto xd = make_matrix({"x", "z"}, {{0, 1, 1, 2, 3}, {1, -1, -1, 0.5, 2}});
  std::vector<double> yd = {1, 2, 2, 2.5, 5};

  auto mw = dynamic_cast<const LinearModel&>(*fit_linear(xw, yw, w));
  auto md = dynamic_cast<const LinearModel&>(*fit_linear(xd, yd, ones(5)));
  EXPECT_NEAR(mw.intercept(), md.intercept(), 1e-9);
  for (std::size_t j = 0; j < 2; ++j)
    EXPECT_NEAR(mw.coefficients()[j], md.coefficients()[j], 1e-9);
}

TEST(FitLinear, DimensionMismatchAndTooFewRows) {
  auto x = make_matrix({"x"}, {{1, 2, 3}});
  EXPECT_THROW(fit_linear(x, {1, 2}, ones(3)), DataError);
  auto x1 = make_matrix({"x"}, {{1}});
  EXPECT_THROW(fit_linear(x1, {1}, ones(1)), DataError);
}

TEST(FitTree, PerfectlySeparableStep) {
  auto x = make_matrix({"x"}, {{1, 2, 3, 4}});
  std::vector<double> y = {0, 0, 10, 10};
  TreeParams params{.max_depth = 1};
  auto model = fit_tree(x, y, ones(4), params);
  const auto& tree = dynamic_cast<const TreeModel&>(*model);
  ASSERT_EQ(tree.nodes()[0].feature, 0);
  EXPECT_GT(tree.nodes()[0].threshold, 2.0);
  EXPECT_LT(tree.nodes()[0].threshold, 3.0);
  EXPECT_DOUBLE_EQ(model->predict_row({1.5}), 0.0);
  EXPECT_DOUBLE_EQ(model->predict_row({3.7}), 10.0);
}

TEST(FitTree, ConstantTargetSingleLeaf) {
  auto x = make_matrix({"x"}, {{1, 2, 3, 4}});
  std::vector<double> w = {1, 1, 3, 1};
  auto model = fit_tree(x, {7, 7, 7, 7}, w);
  const auto& tree = dynamic_cast<const TreeModel&>(*model);
  EXPECT_EQ(tree.nodes().size(), 1u);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].value, 7.0);
}

TEST(FitTree, DepthTwoBeatsDepthOneOnXorPattern) {
  // XOR-like with a small linear tilt so the greedy first split has gain
  auto x = make_matrix({"a", "b"}, {{0, 0, 1, 1, 0, 0, 1, 1}, {0, 1, 0, 1, 0, 1, 0, 1}});
  std::vector<double> y = {0, 10, 10.6, 0.6, 0, 10, 10.6, 0.6};
  auto mse = [&](const Model& m) {
    auto pred = m.predict(x);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return s / y.size();
  };
  auto d1 = fit_tree(x, y, ones(8), TreeParams{.max_depth = 1});
  auto d2 = fit_tree(x, y, ones(8), TreeParams{.max_depth = 2});
  EXPECT_LT(mse(*d2), mse(*d1));
}

TEST(FitTree, WeightedEqualsDuplicatedRows) {
  auto xw = make_matrix({"x"}, {{1, 2, 3, 4, 5, 6}});
  std::vector<double> yw = {0, 1, 0, 8, 9, 8};
  std::vector<double> w = {1, 3, 1, 1, 2, 1};

  std::vector<double> xd_col, yd;
  for (std::size_t i = 0; i < yw.size(); ++i)
    for (int k = 0; k < static_cast<int>(w[i]); ++k) {
      xd_col.push_back(xw.at(i, 0));
      yd.push_back(yw[i]);
    }
  auto xd = make_matrix({"x"}, {xd_col});

  TreeParams params{.max_depth = 3, .min_samples_leaf = 1};
  auto mw = fit_tree(xw, yw, w, params);
  auto md = fit_tree(xd, yd, ones(yd.size()), params);
  for (double q = 0.5; q < 7.0; q += 0.25)
    EXPECT_NEAR(mw->predict_row({q}), md->predict_row({q}), 1e-9);
}

TEST(Forest, ReducesToSingleTreeWithoutBootstrap) {
  auto f = nonlinear_fixture(1, 200);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  params.tree = TreeParams{.max_depth = 5, .min_samples_leaf = 1, .feature_subsample = 1.0};
  auto forest = fit_random_forest(f.x, f.y, f.w, params, 99);
  auto tree = fit_tree(f.x, f.y, f.w, params.tree);
  auto pf = forest->predict(f.x);
  auto pt = tree->predict(f.x);
  for (std::size_t i = 0; i < pf.size(); ++i) EXPECT_DOUBLE_EQ(pf[i], pt[i]);
}

TEST(Forest, ConstantTargetPredictsConstant) {
  auto x = make_matrix({"x", "z"}, {{1, 2, 3, 4, 5}, {2, 1, 5, 3, 4}});
  auto model = fit_random_forest(x, {3, 3, 3, 3, 3}, ones(5), ForestParams{.n_trees = 10}, 7);
  for (double v : model->predict(x)) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(Forest, SeedsAgreeWithinTolerance) {
  auto f = nonlinear_fixture(2);
  FeatureMatrix xt = f.x.select_rows(f.train);
  std::vector<double> yt, wt;
  for (auto r : f.train) {
    yt.push_back(f.y[r]);
    wt.push_back(f.w[r]);
  }
  ForestParams params{.n_trees = 50};
  auto m1 = fit_random_forest(xt, yt, wt, params, 101);
  auto m2 = fit_random_forest(xt, yt, wt, params, 202);
  double r1 = valid_r2(*m1, f), r2 = valid_r2(*m2, f);
  EXPECT_NEAR(r1, r2, 0.1);
  EXPECT_GT(r1, 0.5);
}

TEST(Forest, DeterministicGivenSeed) {
  auto f = nonlinear_fixture(3, 120);
  ForestParams params{.n_trees = 12};
  auto m1 = fit_random_forest(f.x, f.y, f.w, params, 55);
  auto m2 = fit_random_forest(f.x, f.y, f.w, params, 55);
  auto p1 = m1->predict(f.x), p2 = m2->predict(f.x);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1[i], p2[i]);
}

TEST(Forest, AtLeastAsGoodAsSingleTree) {
  for (std::uint64_t seed : {11, 12, 13, 14, 15}) {
    auto f = nonlinear_fixture(seed);
    FeatureMatrix xt = f.x.select_rows(f.train);
    std::vector<double> yt, wt;
    for (auto r : f.train) {
      yt.push_back(f.y[r]);
      wt.push_back(f.w[r]);
    }
    TreeParams tp{.max_depth = 16, .min_samples_leaf = 2, .feature_subsample = 1.0};
    auto tree = fit_tree(xt, yt, wt, tp);
    ForestParams fp;
    fp.tree.max_depth = 16;
    auto forest = fit_random_forest(xt, yt, wt, fp, seed);
    EXPECT_GE(valid_r2(*forest, f), valid_r2(*tree, f) - 0.02) << "seed " << seed;
  }
}

TEST(Gbt, OneRoundIsMeanPlusResidualTree) {
  auto f = nonlinear_fixture(4, 100);
  GbtParams params;
  params.n_rounds = 1;
  params.learning_rate = 1.0;
  params.l2_leaf = 0.0;
  params.tree = TreeParams{.max_depth = 8, .min_samples_leaf = 1};
  auto model = fit_gbt(f.x, f.y, f.w, params);

  const double base = stats::weighted_mean(f.y, f.w);
  std::vector<double> residual(f.y.size());
  for (std::size_t i = 0; i < f.y.size(); ++i) residual[i] = f.y[i] - base;
  auto tree = fit_tree(f.x, residual, f.w, params.tree);

  auto pg = model->predict(f.x);
  auto pt = tree->predict(f.x);
  for (std::size_t i = 0; i < pg.size(); ++i) EXPECT_NEAR(pg[i], base + pt[i], 1e-12);
}

TEST(Gbt, ZeroRoundsRejected) {
  auto x = make_matrix({"x"}, {{1, 2}});
  GbtParams params;
  params.n_rounds = 0;
  EXPECT_THROW(fit_gbt(x, {1, 2}, ones(2), params), ConfigError);
}

TEST(Gbt, TrainingMseNonIncreasing) {
  auto f = nonlinear_fixture(5, 300);
  GbtParams params;
  params.n_rounds = 60;
  auto model = fit_gbt(f.x, f.y, f.w, params);
  const auto& mse = dynamic_cast<const GbtModel&>(*model).training_mse();
  ASSERT_EQ(mse.size(), 61u);
  for (std::size_t i = 1; i < mse.size(); ++i) EXPECT_LE(mse[i], mse[i - 1] + 1e-12);
}

TEST(Gbt, FitsExactLineToHighR2) {
  Rng rng(6);
  std::vector<double> xs(150), y(150);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = rng.uniform(-5, 5);
    y[i] = 3.0 * xs[i] + 1.0;
  }
  auto x = make_matrix({"x"}, {xs});
  GbtParams params;  // 200 rounds, lr 0.1
  auto model = fit_gbt(x, y, ones(150), params);
  auto rep = evaluate(y, model->predict(x));
  ASSERT_TRUE(rep.r2.has_value());
  EXPECT_GT(*rep.r2, 0.999);
}

TEST(Gbt, DeterministicGivenSeed) {
  auto f = nonlinear_fixture(7, 150);
  GbtParams params;
  params.n_rounds = 30;
  params.tree.feature_subsample = 0.5;  // engages the seeded subsampler
  auto p1 = fit_gbt(f.x, f.y, f.w, params, 31)->predict(f.x);
  auto p2 = fit_gbt(f.x, f.y, f.w, params, 31)->predict(f.x);
  for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1[i], p2[i]);
}

TEST(Predict, EmptyMatrixGivesEmptyPredictions) {
  auto x = make_matrix({"x"}, {{1, 2, 3}});
  auto model = fit_linear(x, {1, 2, 3}, ones(3));
  FeatureMatrix empty;
  empty.names = {"x"};
  empty.n_rows = 0;
  EXPECT_TRUE(model->predict(empty).empty());
}

TEST(Predict, PureFunctionBitIdentical) {
  auto f = nonlinear_fixture(8, 80);
  auto model = fit_gbt(f.x, f.y, f.w, GbtParams{.n_rounds = 20});
  auto p1 = model->predict(f.x);
  auto p2 = model->predict(f.x);
  EXPECT_EQ(p1, p2);
}

TEST(Predict, LinearAtMeanVector) {
  auto x = make_matrix({"a", "b"}, {{1, 2, 3, 4}, {0, 1, 1, 2}});
  std::vector<double> y = {2, 5, 6, 9};
  auto model = fit_linear(x, y, ones(4));
  const auto& lin = dynamic_cast<const LinearModel&>(*model);
  std::vector<double> mean_row = {2.5, 1.0};
  double expected = lin.intercept();
  for (std::size_t j = 0; j < 2; ++j) expected += lin.coefficients()[j] * mean_row[j];
  EXPECT_NEAR(model->predict_row(mean_row), expected, 1e-12);
}

TEST(Predict, FeatureMismatchNamesOffenders) {
  auto x = make_matrix({"a", "b"}, {{1, 2}, {3, 4}});
  auto model = fit_linear(x, {1, 2}, ones(2));
  auto bad = make_matrix({"a", "c"}, {{1, 2}, {3, 4}});
  try {
    model->predict(bad);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("'c'"), std::string::npos);
    EXPECT_NE(msg.find("'b'"), std::string::npos);
  }
}

TEST(Importance, LoneSplitGetsFullCredit) {
  auto x = make_matrix({"a", "b"}, {{1, 2, 3, 4}, {5, 5, 5, 5}});
  std::vector<double> y = {0, 0, 10, 10};
  auto model = fit_tree(x, y, ones(4), TreeParams{.max_depth = 1});
  auto imp = impurity_importance(*model);
  EXPECT_DOUBLE_EQ(imp[0], 1.0);
  EXPECT_DOUBLE_EQ(imp[1], 0.0);
}

TEST(Importance, ScoresSumToOne) {
  auto f = nonlinear_fixture(9, 300);
  auto model = fit_random_forest(f.x, f.y, f.w, ForestParams{.n_trees = 20}, 5);
  auto imp = impurity_importance(*model);
  double total = 0;
  for (double v : imp) total += v;
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Importance, PlantedSignalDominates) {
  Rng rng(10);
  std::vector<std::vector<double>> cols(5, std::vector<double>(500));
  for (auto& c : cols)
    for (auto& v : c) v = rng.normal();
  std::vector<double> y(500);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 4.0 * cols[0][i] + rng.normal(0, 0.2);
  auto x = make_matrix({"x1", "x2", "x3", "x4", "x5"}, cols);
  auto model = fit_random_forest(x, y, ones(500), ForestParams{.n_trees = 30}, 77);
  auto imp = impurity_importance(*model);
  for (std::size_t j = 1; j < 5; ++j) EXPECT_GT(imp[0], imp[j]);
}

TEST(Importance, NonTreeModelUnsupported) {
  auto x = make_matrix({"x"}, {{1, 2, 3}});
  auto model = fit_linear(x, {1, 2, 3}, ones(3));
  EXPECT_THROW(impurity_importance(*model), DataError);
}

TEST(GridSearch, SingletonGridReturnsThatModel) {
  auto f = nonlinear_fixture(11, 200);
  SplitPlan split;
  split.train = f.train;
  split.valid = f.valid;
  auto result = grid_search({GbtSpec{GbtParams{.n_rounds = 10}}}, f.x, f.y, f.w, split, 1);
  EXPECT_EQ(result.best_index, 0u);
  EXPECT_EQ(result.best->kind(), "gbt");
  EXPECT_TRUE(result.table[0].valid_r2.has_value());
}

TEST(GridSearch, SelectedCellIsArgmax) {
  auto f = nonlinear_fixture(12);
  SplitPlan split;
  split.train = f.train;
  split.valid = f.valid;
  std::vector<ModelSpec> grid = {
      TreeSpec{TreeParams{.max_depth = 1}},
      TreeSpec{TreeParams{.max_depth = 4}},
      TreeSpec{TreeParams{.max_depth = 8}},
      LinearSpec{},
  };
  auto result = grid_search(grid, f.x, f.y, f.w, split, 2);
  const double best = *result.table[result.best_index].valid_r2;
  for (const auto& cell : result.table)
    if (cell.valid_r2) EXPECT_GE(best, *cell.valid_r2);
}

TEST(GridSearch, TieBreaksToEarliestCell) {
  auto f = nonlinear_fixture(13, 100);
  SplitPlan split;
  split.train = f.train;
  split.valid = f.valid;
  std::vector<ModelSpec> grid = {LinearSpec{}, LinearSpec{}};
  auto result = grid_search(grid, f.x, f.y, f.w, split, 3);
  EXPECT_EQ(result.best_index, 0u);
}

TEST(GridSearch, FitErrorsRecordedPerCell) {
  auto f = nonlinear_fixture(14, 100);
  SplitPlan split;
  split.train = f.train;
  split.valid = f.valid;
  MlpParams divergent;
  divergent.optimizer = Optimizer::SgdMomentum;
  divergent.learning_rate = 1e12;  // guaranteed to blow up
  divergent.epochs = 5;
  std::vector<ModelSpec> grid = {MlpSpec{divergent}, LinearSpec{}};
  auto result = grid_search(grid, f.x, f.y, f.w, split, 4);
  EXPECT_FALSE(result.table[0].error.empty());
  EXPECT_TRUE(result.table[1].valid_r2.has_value());
  EXPECT_EQ(result.best_index, 1u);
}

TEST(Serialization, RoundTripPreservesPredictions) {
  auto f = nonlinear_fixture(15, 150);
  std::vector<std::pair<std::string, ModelPtr>> models = {
      {"linear", fit_linear(f.x, f.y, f.w)},
      {"tree", fit_tree(f.x, f.y, f.w, TreeParams{.max_depth = 5})},
      {"forest", fit_random_forest(f.x, f.y, f.w, ForestParams{.n_trees = 8}, 21)},
      {"gbt", fit_gbt(f.x, f.y, f.w, GbtParams{.n_rounds = 15})},
  };
  for (const auto& [kind, model] : models) {
    auto j = model->to_json();
    EXPECT_EQ(j.at("kind"), kind);
    EXPECT_EQ(j.at("version"), 1);
    auto reloaded = model_from_json(nlohmann::json::parse(j.dump()));
    auto p1 = model->predict(f.x);
    auto p2 = reloaded->predict(f.x);
    for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1[i], p2[i]) << kind;
  }
}
