#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "salix/dataset.hpp"
#include "salix/metrics.hpp"
#include "salix/models.hpp"
#include "salix/shap.hpp"
#include "salix/sobol.hpp"

namespace salix {

// Ranks 1..p over scores, 1 = most important; ties get average ranks.
inline std::vector<double> ranks_from_scores(const std::vector<double>& scores) {
  std::vector<double> negated(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) negated[i] = -scores[i];
  return stats::average_ranks(negated);
}

struct AttributionResult {
  std::string method;  // rfe | shap | gsa-s1 | gsa-st
  std::vector<std::string> features;
  std::vector<double> scores;
  std::vector<double> ranks;
  nlohmann::json metadata;

  static AttributionResult make(std::string method, std::vector<std::string> features,
                                std::vector<double> scores, nlohmann::json metadata) {
    AttributionResult r;
    r.method = std::move(method);
    r.features = std::move(features);
    r.ranks = ranks_from_scores(scores);
    r.scores = std::move(scores);
    r.metadata = std::move(metadata);
    return r;
  }

  // Feature names ordered most-important first.
  std::vector<std::string> ordered_features() const {
    std::vector<std::size_t> idx(features.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(features[i]);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < features.size(); ++i)
      entries.push_back({{"feature", features[i]}, {"score", scores[i]}, {"rank", ranks[i]}});
    return {{"method", method}, {"entries", entries}, {"metadata", metadata}};
  }

  std::string to_csv() const {
    std::string out = "method,feature,score,rank\n";
    for (std::size_t i = 0; i < features.size(); ++i)
      out += method + "," + features[i] + "," + format_double(scores[i]) + "," +
             format_double(ranks[i]) + "\n";
    return out;
  }

  static AttributionResult from_csv(std::istream& in) {
    AttributionResult r;
    std::string line;
    if (!std::getline(in, line) || line.find("method,feature,score,rank") != 0)
      throw DataError("attribution CSV: bad header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = detail::split_csv_line(line);
      if (fields.size() != 4) throw DataError("attribution CSV: bad row '" + line + "'");
      r.method = fields[0];
      r.features.push_back(fields[1]);
      r.scores.push_back(std::stod(fields[2]));
      r.ranks.push_back(std::stod(fields[3]));
    }
    if (r.features.empty()) throw DataError("attribution CSV: no rows");
    return r;
  }
};

// ---------------------------------------------------------------------------
// Recursive feature elimination with a tree-ensemble learner.
// ---------------------------------------------------------------------------
struct RfeTrace {
  std::vector<std::string> elimination_order;           // first removed first
  std::vector<std::vector<std::string>> step_features;  // feature set at each step
  std::vector<double> step_valid_r2;
  std::vector<std::string> selected;                    // max valid R2, ties -> smaller subset
  std::map<std::string, double> final_importance;       // over the last step's features

  nlohmann::json to_json() const {
    return {{"elimination_order", elimination_order},
            {"step_valid_r2", step_valid_r2},
            {"selected", selected}};
  }
};

class RfeError : public Error {
 public:
  RfeError(ErrorCategory category, const std::string& message, RfeTrace partial)
      : Error(category, message), partial_trace(std::move(partial)) {}
  RfeTrace partial_trace;
};

// Each iteration fits on the train rows, scores weighted R^2 on the
// validation rows, and removes the feature with the lowest impurity
// importance (ties remove the later one in schema order).
inline RfeTrace rfe(const Dataset& ds, const ForestParams& learner, const SplitPlan& split,
                    std::size_t min_features, std::uint64_t seed) {
  if (min_features < 1) throw ConfigError("rfe: min_features must be >= 1");
  const FeatureMatrix all = ds.feature_matrix();
  if (all.n_cols() == 0) throw DataError("rfe: no numeric predictor columns");
  const auto y = ds.target_values();

  std::vector<std::string> features = all.names;
  RfeTrace trace;

  auto subset_matrix = [&](const std::vector<std::size_t>& rows) {
    FeatureMatrix m = FeatureMatrix::zeros(features, rows.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
      const auto col = static_cast<std::size_t>(
          std::find(all.names.begin(), all.names.end(), features[j]) - all.names.begin());
      for (std::size_t i = 0; i < rows.size(); ++i) m.at(i, j) = all.at(rows[i], col);
    }
    return m;
  };

  std::vector<double> y_train, w_train, y_valid, w_valid;
  for (auto r : split.train) {
    y_train.push_back(y[r]);
    w_train.push_back(ds.weights[r]);
  }
  for (auto r : split.valid) {
    y_valid.push_back(y[r]);
    w_valid.push_back(ds.weights[r]);
  }

  std::size_t step = 0;
  while (true) {
    try {
      FeatureMatrix x_train = subset_matrix(split.train);
      FeatureMatrix x_valid = subset_matrix(split.valid);
      ModelPtr model = fit_random_forest(x_train, y_train, w_train, learner, seed + step);
      const auto rep = evaluate(y_valid, model->predict(x_valid), &w_valid);
      trace.step_features.push_back(features);
      trace.step_valid_r2.push_back(rep.r2.value_or(-std::numeric_limits<double>::infinity()));

      const auto importance = impurity_importance(*model);
      if (features.size() <= min_features) {
        for (std::size_t j = 0; j < features.size(); ++j)
          trace.final_importance[features[j]] = importance[j];
        break;
      }
      // lowest importance leaves; ties remove the later column in schema order
      std::size_t worst = 0;
      for (std::size_t j = 1; j < features.size(); ++j)
        if (importance[j] <= importance[worst]) worst = j;
      trace.elimination_order.push_back(features[worst]);
      features.erase(features.begin() + static_cast<std::ptrdiff_t>(worst));
      ++step;
    } catch (const Error& e) {
      throw RfeError(e.category(), std::string("rfe aborted: ") + e.what(), trace);
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < trace.step_valid_r2.size(); ++s) {
    if (trace.step_valid_r2[s] >= best) {  // ties -> later (smaller) subset
      best = trace.step_valid_r2[s];
      trace.selected = trace.step_features[s];
    }
  }
  return trace;
}

// Elimination-order scores: the k-th removed feature scores k, survivors of
// the final step continue upward ordered by their final-fit importance.
inline AttributionResult rfe_attribution(const RfeTrace& trace,
                                         const std::vector<std::string>& all_features,
                                         nlohmann::json metadata = {}) {
  std::map<std::string, double> score;
  for (std::size_t i = 0; i < trace.elimination_order.size(); ++i)
    score[trace.elimination_order[i]] = static_cast<double>(i + 1);
  std::vector<std::pair<double, std::string>> survivors;
  for (const auto& [name, importance] : trace.final_importance)
    survivors.emplace_back(importance, name);
  std::sort(survivors.begin(), survivors.end());
  double next = static_cast<double>(trace.elimination_order.size() + 1);
  for (const auto& [importance, name] : survivors) score[name] = next++;

  std::vector<double> scores;
  for (const auto& f : all_features) {
    auto it = score.find(f);
    if (it == score.end()) throw DataError("rfe_attribution: feature '" + f + "' not in trace");
    scores.push_back(it->second);
  }
  return AttributionResult::make("rfe", all_features, std::move(scores), std::move(metadata));
}

// ---------------------------------------------------------------------------
// Sobol GSA over a trained model's input box.
// ---------------------------------------------------------------------------
enum class GsaSampling { UniformRange, EmpiricalMarginal };

struct GsaResult {
  AttributionResult s1;
  AttributionResult st;
  SobolIndices indices;
};

// Bounds come from the per-feature empirical [min, max] of the dataset.
// Inputs are sampled independently (uniform over the range by default,
// empirical-marginal quantile resampling as the alternative); the
// correlation-ignoring assumption is stamped into the metadata.
inline GsaResult gsa_over_model(const Model& model, const Dataset& ds, std::size_t n_base,
                                std::uint64_t seed,
                                GsaSampling sampling = GsaSampling::UniformRange,
                                std::size_t n_bootstrap = 200) {
  const auto& names = model.feature_names();
  std::vector<std::array<double, 2>> bounds;
  std::vector<std::vector<double>> sorted_values;
  for (const auto& name : names) {
    const Column& c = ds.column(name);
    if (!stores_numeric(c.spec.kind) || c.num.empty())
      throw DataError("gsa_over_model: column '" + name + "' is not usable");
    double lo = c.num[0], hi = c.num[0];
    for (std::size_t r = 0; r < c.num.size(); ++r) {
      if (c.missing[r]) throw DataError("gsa_over_model: column '" + name + "' has missing cells");
      lo = std::min(lo, c.num[r]);
      hi = std::max(hi, c.num[r]);
    }
    bounds.push_back({lo, hi});
    if (sampling == GsaSampling::EmpiricalMarginal) {
      auto v = c.num;
      std::sort(v.begin(), v.end());
      sorted_values.push_back(std::move(v));
    }
  }

  SobolDesign design = sobol_design(names, bounds, n_base, seed);
  if (sampling == GsaSampling::EmpiricalMarginal) {
    // Map each uniform coordinate through the empirical quantile function.
    auto remap = [&](FeatureMatrix& m) {
      for (std::size_t j = 0; j < names.size(); ++j) {
        const auto& sorted = sorted_values[j];
        const double lo = bounds[j][0], hi = bounds[j][1];
        for (std::size_t r = 0; r < m.n_rows; ++r) {
          const double u = (m.at(r, j) - lo) / (hi - lo);
          const double pos = u * static_cast<double>(sorted.size() - 1);
          const auto i0 = static_cast<std::size_t>(pos);
          const auto i1 = std::min(i0 + 1, sorted.size() - 1);
          m.at(r, j) = sorted[i0] + (pos - static_cast<double>(i0)) * (sorted[i1] - sorted[i0]);
        }
      }
    };
    remap(design.a);
    remap(design.b);
    for (auto& m : design.ab) remap(m);
  }

  GsaResult out;
  out.indices = sobol_indices(model, design, n_bootstrap, seed);
  nlohmann::json meta{{"n_base", n_base},
                      {"seed", seed},
                      {"model", model.kind()},
                      {"sampling", sampling == GsaSampling::UniformRange ? "uniform-range"
                                                                         : "empirical-marginal"},
                      {"independence_assumed", true},
                      {"constant_model", out.indices.constant_model}};
  out.s1 = AttributionResult::make("gsa-s1", names, out.indices.s1, meta);
  out.st = AttributionResult::make("gsa-st", names, out.indices.st, meta);
  return out;
}

// ---------------------------------------------------------------------------
// Cross-method rank agreement (the Table-2-shaped matrix).
// ---------------------------------------------------------------------------
struct RankMatrix {
  std::vector<std::string> methods;
  std::vector<std::vector<std::optional<double>>> rho;  // symmetric, unit diagonal

  nlohmann::json to_json() const {
    nlohmann::json m = nlohmann::json::array();
    for (const auto& row : rho) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& v : row) {
        if (v) r.push_back(*v);
        else r.push_back(nullptr);
      }
      m.push_back(std::move(r));
    }
    return {{"methods", methods}, {"spearman", m}};
  }

  std::string to_markdown() const {
    std::string md = "| |";
    for (const auto& m : methods) md += " " + m + " |";
    md += "\n|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) md += "---|";
    md += "\n";
    for (std::size_t i = 0; i < methods.size(); ++i) {
      md += "| " + methods[i] + " |";
      for (std::size_t j = 0; j < methods.size(); ++j)
        md += " " + (rho[i][j] ? format_double(*rho[i][j]) : std::string("n/a")) + " |";
      md += "\n";
    }
    return md;
  }
};

// Pairwise Spearman over the methods' score vectors, aligned on the first
// result's feature order. Mismatched feature sets are an error naming the
// missing features.
inline RankMatrix rank_compare(const std::vector<AttributionResult>& results) {
  if (results.empty()) throw ConfigError("rank_compare: no attribution results");
  const auto& reference = results.front().features;

  std::vector<std::vector<double>> aligned;
  for (const auto& result : results) {
    std::map<std::string, double> by_name;
    for (std::size_t i = 0; i < result.features.size(); ++i)
      by_name[result.features[i]] = result.scores[i];
    std::string missing;
    for (const auto& f : reference)
      if (!by_name.count(f)) missing += " '" + f + "'";
    for (const auto& f : result.features)
      if (std::find(reference.begin(), reference.end(), f) == reference.end())
        missing += " '" + f + "'";
    if (!missing.empty())
      throw DataError("rank_compare: feature sets differ, offending:" + missing);
    std::vector<double> scores;
    for (const auto& f : reference) scores.push_back(by_name[f]);
    aligned.push_back(std::move(scores));
  }

  RankMatrix matrix;
  for (const auto& r : results) matrix.methods.push_back(r.method);
  matrix.rho.assign(results.size(), std::vector<std::optional<double>>(results.size()));
  for (std::size_t i = 0; i < results.size(); ++i)
    for (std::size_t j = i; j < results.size(); ++j) {
      auto v = spearman(aligned[i], aligned[j]);
      matrix.rho[i][j] = v;
      matrix.rho[j][i] = v;
    }
  return matrix;
}

}  // namespace salix
