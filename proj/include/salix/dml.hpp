#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "salix/dataset.hpp"
#include "salix/models.hpp"
#include "salix/stats.hpp"

namespace salix {

struct CausalEstimate {
  std::string treatment;
  std::string units;
  double theta = 0.0;    // mg/L per treatment unit
  double stderror = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::string nuisance_kind;
  int folds = 0;
  bool significant = false;
  std::string error;  // set when the scan recorded a failure for this treatment

  nlohmann::json to_json() const {
    nlohmann::json j{{"treatment", treatment}, {"units", units},
                     {"theta", theta},         {"stderr", stderror},
                     {"t_stat", t_stat},       {"p_value", p_value},
                     {"n", n},                 {"nuisance", nuisance_kind},
                     {"folds", folds},         {"significant", significant}};
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

namespace detail {

// Drill-grouped fold assignment: all rows of one drill share a fold, groups
// are shuffled with the seeded stream and dealt round-robin.
inline std::vector<int> group_folds(const Dataset& ds, int k_folds, std::uint64_t seed) {
  if (k_folds < 2) throw ConfigError("cross-fitting needs k_folds >= 2");
  const auto groups = ds.group_values();
  std::map<std::string, int> fold_of_group;
  std::vector<std::string> names;
  for (const auto& g : groups)
    if (fold_of_group.emplace(g, -1).second) names.push_back(g);
  std::sort(names.begin(), names.end());
  if (names.size() < static_cast<std::size_t>(k_folds))
    throw DataError("cross-fitting: " + std::to_string(names.size()) + " drill groups cannot fill " +
                    std::to_string(k_folds) + " folds");
  Rng rng = Rng::stream(seed, "folds");
  rng.shuffle(names);
  for (std::size_t i = 0; i < names.size(); ++i)
    fold_of_group[names[i]] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
  std::vector<int> folds(ds.n_rows());
  for (std::size_t r = 0; r < folds.size(); ++r) folds[r] = fold_of_group[groups[r]];
  return folds;
}

inline std::vector<double> column_values(const Dataset& ds, const std::string& name) {
  const Column& c = ds.column(name);
  if (!stores_numeric(c.spec.kind))
    throw DataError("dml: column '" + name + "' is not numeric");
  for (std::size_t r = 0; r < c.size(); ++r)
    if (c.missing[r]) throw DataError("dml: column '" + name + "' has missing cells; impute first");
  return c.num;
}

inline FeatureMatrix covariate_matrix(const Dataset& ds, const std::vector<std::string>& names) {
  FeatureMatrix m = FeatureMatrix::zeros(names, ds.n_rows());
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto values = column_values(ds, names[j]);
    for (std::size_t r = 0; r < m.n_rows; ++r) m.at(r, j) = values[r];
  }
  return m;
}

// Out-of-fold residuals of `values` on the covariates: each fold's rows are
// predicted by a learner that never saw them.
inline std::vector<double> residualize_with_folds(const Dataset& ds,
                                                  const std::vector<double>& values,
                                                  const FeatureMatrix& x, const ModelSpec& learner,
                                                  const std::vector<int>& folds, int k_folds,
                                                  std::uint64_t seed) {
  std::vector<double> residuals(ds.n_rows(), 0.0);
  for (int fold = 0; fold < k_folds; ++fold) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
      (folds[r] == fold ? test_rows : train_rows).push_back(r);
    if (train_rows.empty() || test_rows.empty())
      throw DataError("cross-fitting: fold " + std::to_string(fold) + " is empty");
    FeatureMatrix x_train = x.select_rows(train_rows);
    std::vector<double> y_train, w_train;
    for (auto r : train_rows) {
      y_train.push_back(values[r]);
      w_train.push_back(ds.weights[r]);
    }
    ModelPtr fitted = fit_model(learner, x_train, y_train, w_train,
                                seed + static_cast<std::uint64_t>(fold) * 7919);
    const auto pred = fitted->predict(x.select_rows(test_rows));
    for (std::size_t i = 0; i < test_rows.size(); ++i)
      residuals[test_rows[i]] = values[test_rows[i]] - pred[i];
  }
  return residuals;
}

}  // namespace detail

// Cross-fitted residuals of one column on a covariate set (drill-grouped
// folds, sample weights respected in the nuisance fits).
inline std::vector<double> residualize(const Dataset& ds, const std::string& column,
                                       const std::vector<std::string>& covariates,
                                       const ModelSpec& learner, int k_folds, std::uint64_t seed) {
  for (const auto& c : covariates)
    if (c == column) throw ConfigError("residualize: '" + column + "' cannot be its own covariate");
  const auto values = detail::column_values(ds, column);
  const auto x = detail::covariate_matrix(ds, covariates);
  const auto folds = detail::group_folds(ds, k_folds, seed);
  return detail::residualize_with_folds(ds, values, x, learner, folds, k_folds, seed);
}

struct DmlOptions {
  int k_folds = 5;
  double alpha = 0.05;
  bool intercept = false;  // residuals are mean-zero under cross-fitting
  std::uint64_t seed = 0;
};

// Three-step estimate: residualize outcome and treatment on the covariates
// with shared folds, then regress residual outcome on residual treatment.
// theta = sum(Tres * Yres) / sum(Tres^2), HC0 sandwich standard error,
// two-sided p from a t distribution with n-1 degrees of freedom.
inline CausalEstimate dml_effect(const Dataset& ds, const std::string& treatment,
                                 const std::string& outcome,
                                 const std::vector<std::string>& covariates,
                                 const ModelSpec& learner, const DmlOptions& opts = {}) {
  for (const auto& c : covariates)
    if (c == treatment || c == outcome)
      throw ConfigError("dml_effect: covariates must exclude treatment and outcome");

  const auto y = detail::column_values(ds, outcome);
  const auto t = detail::column_values(ds, treatment);
  const auto x = detail::covariate_matrix(ds, covariates);
  const auto folds = detail::group_folds(ds, opts.k_folds, opts.seed);
  auto y_res = detail::residualize_with_folds(ds, y, x, learner, folds, opts.k_folds, opts.seed);
  auto t_res =
      detail::residualize_with_folds(ds, t, x, learner, folds, opts.k_folds, opts.seed + 0x51u);

  const std::size_t n = y_res.size();
  if (opts.intercept) {
    const double my = stats::mean(y_res), mt = stats::mean(t_res);
    for (auto& v : y_res) v -= my;
    for (auto& v : t_res) v -= mt;
  }

  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += t_res[i] * t_res[i];
    sty += t_res[i] * y_res[i];
  }
  if (stt < 1e-12)
    throw NumericError("dml_effect: treatment '" + treatment +
                       "' is fully explained by the covariates (degenerate residual)");

  CausalEstimate est;
  est.treatment = treatment;
  est.units = ds.column(treatment).spec.units;
  est.theta = sty / stt;
  est.n = n;
  est.nuisance_kind = model_spec_kind(learner);
  est.folds = opts.k_folds;

  double meat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y_res[i] - est.theta * t_res[i];
    meat += t_res[i] * t_res[i] * e * e;
  }
  est.stderror = std::sqrt(meat) / stt;
  if (est.stderror > 0) {
    est.t_stat = est.theta / est.stderror;
    est.p_value = stats::t_two_sided_p(est.t_stat, static_cast<double>(n) - 1.0);
  } else {
    est.t_stat = est.theta >= 0 ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    est.p_value = 0.0;
  }
  est.significant = est.p_value < opts.alpha;
  return est;
}

// One dml_effect per numeric predictor, every other predictor serving as a
// covariate. Per-treatment failures are recorded and the scan continues.
// Results sort by |theta| descending, failed entries last.
inline std::vector<CausalEstimate> dml_scan(const Dataset& ds, const std::string& outcome,
                                            const ModelSpec& learner, const DmlOptions& opts = {}) {
  std::vector<std::string> predictors = ds.numeric_predictor_names();
  predictors.erase(std::remove(predictors.begin(), predictors.end(), outcome), predictors.end());
  if (predictors.empty()) throw DataError("dml_scan: no numeric predictors to scan");

  std::vector<CausalEstimate> estimates;
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    std::vector<std::string> covariates;
    for (const auto& other : predictors)
      if (other != predictors[i]) covariates.push_back(other);
    DmlOptions per = opts;
    per.seed = opts.seed + i;  // independent stream per treatment
    try {
      estimates.push_back(dml_effect(ds, predictors[i], outcome, covariates, learner, per));
    } catch (const Error& e) {
      CausalEstimate failed;
      failed.treatment = predictors[i];
      failed.nuisance_kind = model_spec_kind(learner);
      failed.folds = opts.k_folds;
      failed.error = e.what();
      estimates.push_back(std::move(failed));
    }
  }
  std::stable_sort(estimates.begin(), estimates.end(), [](const auto& a, const auto& b) {
    if (a.error.empty() != b.error.empty()) return a.error.empty();
    return std::fabs(a.theta) > std::fabs(b.theta);
  });
  return estimates;
}

inline nlohmann::json dml_scan_to_json(const std::vector<CausalEstimate>& estimates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : estimates) arr.push_back(e.to_json());
  return arr;
}

inline std::string dml_scan_to_markdown(const std::vector<CausalEstimate>& estimates) {
  std::string md = "| treatment | theta | stderr | t | p | significant |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& e : estimates) {
    if (!e.error.empty()) {
      md += "| " + e.treatment + " | error | | | | " + e.error + " |\n";
      continue;
    }
    md += "| " + e.treatment + " | " + format_double(e.theta) + " | " + format_double(e.stderror) +
          " | " + format_double(e.t_stat) + " | " + format_double(e.p_value) + " | " +
          (e.significant ? "yes" : "no") + " |\n";
  }
  return md;
}

}  // namespace salix
