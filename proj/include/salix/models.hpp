#pragma once

#include <fstream>
#include <optional>
#include <variant>

#include "salix/dataset.hpp"
#include "salix/forest.hpp"
#include "salix/gbt.hpp"
#include "salix/linear.hpp"
#include "salix/metrics.hpp"
#include "salix/mlp.hpp"
#include "salix/tree.hpp"

namespace salix {

struct LinearSpec {};
struct TreeSpec {
  TreeParams params;
};
struct ForestSpec {
  ForestParams params;
};
struct GbtSpec {
  GbtParams params;
};
struct MlpSpec {
  MlpParams params;
};

using ModelSpec = std::variant<LinearSpec, TreeSpec, ForestSpec, GbtSpec, MlpSpec>;

inline std::string model_spec_kind(const ModelSpec& spec) {
  switch (spec.index()) {
    case 0: return "linear";
    case 1: return "tree";
    case 2: return "forest";
    case 3: return "gbt";
    default: return "mlp";
  }
}

inline nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json j{{"kind", model_spec_kind(spec)}};
  if (const auto* t = std::get_if<TreeSpec>(&spec)) j["params"] = t->params.to_json();
  if (const auto* f = std::get_if<ForestSpec>(&spec)) j["params"] = f->params.to_json();
  if (const auto* g = std::get_if<GbtSpec>(&spec)) j["params"] = g->params.to_json();
  if (const auto* m = std::get_if<MlpSpec>(&spec)) j["params"] = m->params.to_json();
  return j;
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const nlohmann::json params = j.contains("params") ? j["params"] : nlohmann::json::object();
  if (kind == "linear") return LinearSpec{};
  if (kind == "tree") return TreeSpec{TreeParams::from_json(params)};
  if (kind == "forest") return ForestSpec{ForestParams::from_json(params)};
  if (kind == "gbt") return GbtSpec{GbtParams::from_json(params)};
  if (kind == "mlp") return MlpSpec{MlpParams::from_json(params)};
  throw ConfigError("unknown model kind '" + kind + "'");
}

inline ModelPtr fit_model(const ModelSpec& spec, const FeatureMatrix& x,
                          const std::vector<double>& y, const std::vector<double>& w,
                          std::uint64_t seed) {
  return std::visit(
      [&](const auto& s) -> ModelPtr {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearSpec>) return fit_linear(x, y, w);
        else if constexpr (std::is_same_v<T, TreeSpec>) return fit_tree(x, y, w, s.params, seed);
        else if constexpr (std::is_same_v<T, ForestSpec>)
          return fit_random_forest(x, y, w, s.params, seed);
        else if constexpr (std::is_same_v<T, GbtSpec>) return fit_gbt(x, y, w, s.params, seed);
        else return fit_mlp(x, y, w, s.params, seed);
      },
      spec);
}

inline ModelPtr model_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return LinearModel::from_json(j);
  if (kind == "tree") return TreeModel::from_json(j);
  if (kind == "forest") return ForestModel::from_json(j);
  if (kind == "gbt") return GbtModel::from_json(j);
  if (kind == "mlp") return MlpModel::from_json(j);
  throw DataError("cannot load model of kind '" + kind + "'");
}

inline void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << model.to_json().dump(2) << '\n';
}

inline ModelPtr load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

// Impurity importance: per-feature weighted squared-error reduction summed
// over every split of every tree, normalized to sum to 1. Features never
// split on score 0.
inline std::vector<double> impurity_importance(const Model& model) {
  std::vector<double> gains;
  if (const auto* tree = dynamic_cast<const TreeModel*>(&model)) {
    gains = tree->split_gains();
  } else if (const auto* forest = dynamic_cast<const ForestModel*>(&model)) {
    gains.assign(model.feature_names().size(), 0.0);
    for (const auto& t : forest->trees())
      for (std::size_t f = 0; f < gains.size(); ++f) gains[f] += t->split_gains()[f];
  } else if (const auto* gbt = dynamic_cast<const GbtModel*>(&model)) {
    gains.assign(model.feature_names().size(), 0.0);
    for (const auto& t : gbt->trees())
      for (std::size_t f = 0; f < gains.size(); ++f) gains[f] += t->split_gains()[f];
  } else {
    throw DataError("impurity_importance: unsupported for model kind '" + model.kind() + "'");
  }
  double total = 0.0;
  for (double g : gains) total += g;
  if (total > 0.0)
    for (double& g : gains) g /= total;
  return gains;
}

struct GridCell {
  ModelSpec spec;
  std::optional<double> valid_r2;
  std::string error;  // empty on success
};

struct GridSearchResult {
  ModelPtr best;
  std::size_t best_index = 0;
  std::vector<GridCell> table;

  nlohmann::json table_to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < table.size(); ++i) {
      nlohmann::json cell{{"spec", model_spec_to_json(table[i].spec)},
                          {"selected", i == best_index}};
      if (table[i].valid_r2) cell["valid_r2"] = *table[i].valid_r2;
      else cell["valid_r2"] = nullptr;
      if (!table[i].error.empty()) cell["error"] = table[i].error;
      arr.push_back(std::move(cell));
    }
    return arr;
  }
};

// Fits every grid point on the train rows and scores weighted R^2 on the
// validation rows; ties break toward the earliest grid entry. Fit errors are
// recorded in the cell, not rethrown, unless every cell fails.
inline GridSearchResult grid_search(const std::vector<ModelSpec>& grid, const FeatureMatrix& x,
                                    const std::vector<double>& y, const std::vector<double>& w,
                                    const SplitPlan& split, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("grid_search: empty grid");
  const FeatureMatrix x_train = x.select_rows(split.train);
  const FeatureMatrix x_valid = x.select_rows(split.valid);
  std::vector<double> y_train, w_train, y_valid, w_valid;
  for (auto r : split.train) {
    y_train.push_back(y[r]);
    w_train.push_back(w[r]);
  }
  for (auto r : split.valid) {
    y_valid.push_back(y[r]);
    w_valid.push_back(w[r]);
  }

  GridSearchResult result;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    GridCell cell{grid[i], std::nullopt, ""};
    try {
      ModelPtr model = fit_model(grid[i], x_train, y_train, w_train, seed);
      const auto rep = evaluate(y_valid, model->predict(x_valid), &w_valid);
      if (!rep.r2) throw NumericError("validation target has zero variance");
      cell.valid_r2 = *rep.r2;
      if (*rep.r2 > best_score) {
        best_score = *rep.r2;
        result.best = model;
        result.best_index = i;
      }
    } catch (const Error& e) {
      cell.error = e.what();
    }
    result.table.push_back(std::move(cell));
  }
  if (!result.best) throw NumericError("grid_search: every grid cell failed");
  return result;
}

}  // namespace salix
