#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "salix/dataset.hpp"
#include "salix/errors.hpp"
#include "salix/stats.hpp"

namespace salix {

// Keep rows whose target is present and <= threshold; values strictly above
// the threshold are removed as outliers (the boundary value itself stays).
inline Dataset filter_salinity_outliers(const Dataset& ds, double threshold = 4000.0) {
  int t = ds.target_index();
  if (t < 0) throw DataError("filter_salinity_outliers: dataset has no target column");
  const Column& target = ds.columns[static_cast<std::size_t>(t)];
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.n_rows(); ++r)
    if (!target.missing[r] && target.num[r] <= threshold) keep.push_back(r);
  Dataset out = ds.select_rows(keep);
  out.log_step("filter_outliers", "threshold=" + format_double(threshold), ds.n_rows(),
               out.n_rows());
  return out;
}

namespace detail {

inline double column_variance(const Column& c) {
  std::vector<double> vals;
  vals.reserve(c.num.size());
  for (std::size_t r = 0; r < c.num.size(); ++r)
    if (!c.missing[r]) vals.push_back(c.num[r]);
  if (vals.size() < 2) return 0.0;
  return stats::variance(vals);
}

// Pearson over rows where both cells are present.
inline double column_correlation(const Column& a, const Column& b) {
  std::vector<double> x, y;
  for (std::size_t r = 0; r < a.num.size(); ++r) {
    if (!a.missing[r] && !b.missing[r]) {
      x.push_back(a.num[r]);
      y.push_back(b.num[r]);
    }
  }
  if (x.size() < 2) return 0.0;
  double r = stats::pearson(x, y);
  return std::isnan(r) ? 0.0 : r;
}

}  // namespace detail

// Remove numeric predictor columns with sample variance <= eps. Target,
// group-key and time-key columns are never removed.
inline Dataset drop_low_variance(const Dataset& ds, double eps = 1e-12) {
  Dataset out;
  out.weights = ds.weights;
  out.provenance = ds.provenance;
  std::vector<std::string> dropped;
  for (const auto& c : ds.columns) {
    if (c.spec.kind == ColumnKind::Numeric && detail::column_variance(c) <= eps) {
      dropped.push_back(c.spec.name);
      continue;
    }
    out.columns.push_back(c);
  }
  std::string params = "eps=" + format_double(eps);
  for (const auto& n : dropped) params += " dropped=" + n;
  out.log_step("drop_low_variance", params, ds.n_rows(), out.n_rows());
  return out;
}

// Greedy left-to-right scan of the absolute Pearson correlation matrix over
// numeric predictors: for each pair with |r| > threshold the later column in
// schema order is dropped. With fewer than two predictors this is a no-op.
inline Dataset prune_correlated(const Dataset& ds, double threshold = 0.95) {
  std::vector<std::size_t> pred;
  for (std::size_t i = 0; i < ds.columns.size(); ++i)
    if (ds.columns[i].spec.kind == ColumnKind::Numeric) pred.push_back(i);

  std::vector<bool> alive(ds.columns.size(), true);
  std::vector<std::string> dropped;
  for (std::size_t a = 0; a < pred.size(); ++a) {
    if (!alive[pred[a]]) continue;
    for (std::size_t b = a + 1; b < pred.size(); ++b) {
      if (!alive[pred[b]]) continue;
      const double r = detail::column_correlation(ds.columns[pred[a]], ds.columns[pred[b]]);
      if (std::fabs(r) > threshold) {
        alive[pred[b]] = false;
        dropped.push_back(ds.columns[pred[b]].spec.name);
      }
    }
  }

  Dataset out;
  out.weights = ds.weights;
  out.provenance = ds.provenance;
  for (std::size_t i = 0; i < ds.columns.size(); ++i)
    if (alive[i]) out.columns.push_back(ds.columns[i]);
  std::string params = "threshold=" + format_double(threshold);
  for (const auto& n : dropped) params += " dropped=" + n;
  out.log_step("prune_correlated", params, ds.n_rows(), out.n_rows());
  return out;
}

// Mean imputation for numeric cells, mode for categorical (ties broken by
// the lexicographically smallest level). A column with every cell missing
// cannot be imputed and is an error.
inline Dataset impute_mean(const Dataset& ds) {
  Dataset out = ds;
  std::size_t n_filled = 0;
  for (auto& c : out.columns) {
    bool any_missing = false;
    for (auto m : c.missing) any_missing |= (m != 0);
    if (!any_missing) continue;
    if (stores_numeric(c.spec.kind)) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t r = 0; r < c.size(); ++r)
        if (!c.missing[r]) {
          sum += c.num[r];
          ++n;
        }
      if (n == 0) throw DataError("impute: column '" + c.spec.name + "' is entirely missing");
      const double fill = sum / static_cast<double>(n);
      for (std::size_t r = 0; r < c.size(); ++r)
        if (c.missing[r]) {
          c.num[r] = fill;
          c.missing[r] = 0;
          ++n_filled;
        }
    } else {
      std::map<std::string, std::size_t> counts;
      for (std::size_t r = 0; r < c.size(); ++r)
        if (!c.missing[r]) ++counts[c.str[r]];
      if (counts.empty()) throw DataError("impute: column '" + c.spec.name + "' is entirely missing");
      std::string mode;
      std::size_t best = 0;
      for (const auto& [level, count] : counts)
        if (count > best) {  // map order makes ties resolve to the smallest level
          best = count;
          mode = level;
        }
      for (std::size_t r = 0; r < c.size(); ++r)
        if (c.missing[r]) {
          c.str[r] = mode;
          c.missing[r] = 0;
          ++n_filled;
        }
    }
  }
  out.log_step("impute_mean", "filled=" + std::to_string(n_filled), ds.n_rows(), out.n_rows());
  return out;
}

// Replace each named categorical column by one 0/1 indicator per distinct
// level, named "<col>=<level>", levels in lexicographic order.
inline Dataset one_hot_encode(const Dataset& ds, const std::vector<std::string>& names) {
  Dataset out;
  out.weights = ds.weights;
  out.provenance = ds.provenance;
  std::size_t n_new = 0;
  for (const auto& c : ds.columns) {
    const bool selected = std::find(names.begin(), names.end(), c.spec.name) != names.end();
    if (!selected) {
      out.columns.push_back(c);
      continue;
    }
    if (c.spec.kind != ColumnKind::Categorical)
      throw DataError("one_hot_encode: column '" + c.spec.name + "' is not categorical");
    std::set<std::string> levels;
    for (std::size_t r = 0; r < c.size(); ++r) {
      if (c.missing[r])
        throw DataError("one_hot_encode: column '" + c.spec.name +
                        "' has missing cells; impute first");
      levels.insert(c.str[r]);
    }
    for (const auto& level : levels) {
      Column ind;
      ind.spec.name = c.spec.name + "=" + level;
      ind.spec.kind = ColumnKind::Numeric;
      ind.num.reserve(c.size());
      ind.missing.assign(c.size(), 0);
      for (std::size_t r = 0; r < c.size(); ++r) ind.num.push_back(c.str[r] == level ? 1.0 : 0.0);
      out.columns.push_back(std::move(ind));
      ++n_new;
    }
  }
  for (const auto& n : names)
    if (ds.find_column(n) < 0) throw DataError("one_hot_encode: no column named '" + n + "'");
  std::string params = "columns=" + std::to_string(names.size()) + " indicators=" + std::to_string(n_new);
  out.log_step("one_hot_encode", params, ds.n_rows(), out.n_rows());
  return out;
}

// Per-column standardization parameters; sample standard deviation with the
// n-1 denominator throughout.
struct ScalerParams {
  std::vector<std::string> names;
  std::vector<double> means;
  std::vector<double> stds;

  nlohmann::json to_json() const {
    return {{"names", names}, {"means", means}, {"stds", stds}};
  }
  static ScalerParams from_json(const nlohmann::json& j) {
    ScalerParams p;
    p.names = j.at("names").get<std::vector<std::string>>();
    p.means = j.at("means").get<std::vector<double>>();
    p.stds = j.at("stds").get<std::vector<double>>();
    return p;
  }
};

// (x - mean) / std for every numeric predictor; the target stays in mg/L.
inline std::pair<Dataset, ScalerParams> standardize(const Dataset& ds) {
  Dataset out = ds;
  ScalerParams params;
  for (auto& c : out.columns) {
    if (c.spec.kind != ColumnKind::Numeric) continue;
    for (std::size_t r = 0; r < c.size(); ++r)
      if (c.missing[r])
        throw DataError("standardize: column '" + c.spec.name + "' has missing cells");
    const double m = stats::mean(c.num);
    const double sd = std::sqrt(stats::variance(c.num));
    if (sd <= 0.0)
      throw DataError("standardize: column '" + c.spec.name +
                      "' has zero variance; run drop_low_variance first");
    for (auto& v : c.num) v = (v - m) / sd;
    params.names.push_back(c.spec.name);
    params.means.push_back(m);
    params.stds.push_back(sd);
  }
  out.log_step("standardize", "columns=" + std::to_string(params.names.size()), ds.n_rows(),
               out.n_rows());
  return {std::move(out), std::move(params)};
}

inline Dataset standardize_invert(const Dataset& ds, const ScalerParams& params) {
  Dataset out = ds;
  for (std::size_t i = 0; i < params.names.size(); ++i) {
    int idx = out.find_column(params.names[i]);
    if (idx < 0) throw DataError("standardize_invert: no column named '" + params.names[i] + "'");
    for (auto& v : out.columns[static_cast<std::size_t>(idx)].num)
      v = v * params.stds[i] + params.means[i];
  }
  out.log_step("standardize_invert", "columns=" + std::to_string(params.names.size()), ds.n_rows(),
               out.n_rows());
  return out;
}

// Rescale weights by one constant so that mean(weights) == 1.
inline void finalize_weights(Dataset& ds) {
  if (ds.n_rows() == 0) throw DataError("finalize_weights: empty dataset");
  const double m = stats::mean(ds.weights);
  if (m <= 0.0) throw DataError("finalize_weights: nonpositive mean weight");
  for (auto& w : ds.weights) w /= m;
}

// Inverse square-root density weighting: raw weight 1/sqrt(n_g) per group,
// then normalized to mean 1. The group density defaults to the in-dataset
// row count; `density_override` substitutes externally supplied densities.
inline Dataset basin_weights(const Dataset& ds, const std::string& group,
                             const std::map<std::string, double>* density_override = nullptr) {
  if (ds.n_rows() == 0) throw DataError("basin_weights: empty dataset");
  const Column& g = ds.column(group);
  if (stores_numeric(g.spec.kind))
    throw DataError("basin_weights: group column '" + group + "' must be categorical or a group key");
  std::map<std::string, std::size_t> counts;
  for (std::size_t r = 0; r < g.size(); ++r) {
    if (g.missing[r]) throw DataError("basin_weights: row " + std::to_string(r) + " has no group value");
    ++counts[g.str[r]];
  }
  Dataset out = ds;
  for (std::size_t r = 0; r < g.size(); ++r) {
    double density = static_cast<double>(counts[g.str[r]]);
    if (density_override) {
      auto it = density_override->find(g.str[r]);
      if (it == density_override->end())
        throw DataError("basin_weights: no density provided for group '" + g.str[r] + "'");
      density = it->second;
    }
    if (density <= 0.0) throw DataError("basin_weights: nonpositive density for group '" + g.str[r] + "'");
    out.weights[r] = 1.0 / std::sqrt(density);
  }
  finalize_weights(out);
  out.log_step("basin_weights",
               "group=" + group + " groups=" + std::to_string(counts.size()) +
                   (density_override ? " density=external" : " density=row_count"),
               ds.n_rows(), out.n_rows());
  return out;
}

// Within each drill group rows are ordered by year; the last
// ceil(valid_fraction * n) rows go to validation. Single-row groups train.
inline SplitPlan temporal_split(const Dataset& ds, double valid_fraction = 0.2) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0))
    throw ConfigError("temporal_split: valid_fraction must be in (0,1)");
  if (ds.group_key_index() < 0 || ds.time_key_index() < 0)
    throw DataError("temporal_split: dataset needs group-key and time-key columns");
  const auto groups = ds.group_values();
  const auto years = ds.time_values();
  const Column& yc = ds.columns[static_cast<std::size_t>(ds.time_key_index())];
  for (std::size_t r = 0; r < ds.n_rows(); ++r)
    if (yc.missing[r]) throw DataError("temporal_split: row " + std::to_string(r) + " has no year");

  std::map<std::string, std::vector<std::size_t>> by_group;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) by_group[groups[r]].push_back(r);

  SplitPlan plan;
  plan.rule = "temporal valid_fraction=" + format_double(valid_fraction);
  for (auto& [name, rows] : by_group) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return years[a] < years[b]; });
    std::size_t n_valid =
        rows.size() <= 1
            ? 0
            : static_cast<std::size_t>(std::ceil(valid_fraction * static_cast<double>(rows.size())));
    if (n_valid >= rows.size()) n_valid = rows.size() - 1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i + n_valid < rows.size()) plan.train.push_back(rows[i]);
      else plan.valid.push_back(rows[i]);
    }
  }
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.valid.begin(), plan.valid.end());
  return plan;
}

}  // namespace salix
