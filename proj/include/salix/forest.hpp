#pragma once

#include <vector>

#include "salix/tree.hpp"

namespace salix {

struct ForestParams {
  int n_trees = 100;
  TreeParams tree{.max_depth = 16, .min_samples_leaf = 2, .feature_subsample = 1.0 / 3.0};
  bool bootstrap = true;

  void validate() const {
    if (n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    tree.validate();
  }

  nlohmann::json to_json() const {
    return {{"n_trees", n_trees}, {"tree", tree.to_json()}, {"bootstrap", bootstrap}};
  }
  static ForestParams from_json(const nlohmann::json& j) {
    ForestParams p;
    p.n_trees = j.value("n_trees", p.n_trees);
    if (j.contains("tree")) p.tree = TreeParams::from_json(j["tree"]);
    p.bootstrap = j.value("bootstrap", p.bootstrap);
    return p;
  }
};

class ForestModel final : public Model {
 public:
  ForestModel(std::vector<std::string> names, std::vector<std::shared_ptr<TreeModel>> trees)
      : names_(std::move(names)), trees_(std::move(trees)) {}

  std::string kind() const override { return "forest"; }
  const std::vector<std::string>& feature_names() const override { return names_; }
  const std::vector<std::shared_ptr<TreeModel>>& trees() const { return trees_; }

  nlohmann::json to_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees_) arr.push_back(t->to_json());
    return {{"kind", "forest"}, {"version", 1}, {"features", names_}, {"trees", arr}};
  }

  static std::shared_ptr<ForestModel> from_json(const nlohmann::json& j) {
    std::vector<std::shared_ptr<TreeModel>> trees;
    for (const auto& e : j.at("trees")) trees.push_back(TreeModel::from_json(e));
    return std::make_shared<ForestModel>(j.at("features").get<std::vector<std::string>>(),
                                         std::move(trees));
  }

 protected:
  // Unweighted mean over trees.
  std::vector<double> predict_impl(const FeatureMatrix& x) const override {
    std::vector<double> out(x.n_rows, 0.0);
    for (const auto& t : trees_)
      for (std::size_t r = 0; r < x.n_rows; ++r) out[r] += t->predict_one(x.row(r));
    const double inv = 1.0 / static_cast<double>(trees_.size());
    for (auto& v : out) v *= inv;
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::shared_ptr<TreeModel>> trees_;
};

namespace detail {

// Weighted bootstrap: n draws with replacement, probability proportional to w.
inline std::vector<std::size_t> weighted_bootstrap(const std::vector<double>& w, Rng& rng) {
  std::vector<double> cdf(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cdf[i] = acc;
  }
  if (acc <= 0.0) throw DataError("bootstrap: total weight must be positive");
  std::vector<std::size_t> rows(w.size());
  for (auto& r : rows) {
    const double u = rng.uniform01() * acc;
    r = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (r >= w.size()) r = w.size() - 1;
  }
  return rows;
}

}  // namespace detail

// Each tree sees a weighted bootstrap resample and subsampled split
// candidates; per-tree RNG streams are derived from (seed, tree index) so
// results do not depend on evaluation order.
inline ModelPtr fit_random_forest(const FeatureMatrix& x, const std::vector<double>& y,
                                  const std::vector<double>& w, const ForestParams& params,
                                  std::uint64_t seed) {
  detail::check_fit_inputs(x, y, w);
  params.validate();
  if (x.n_rows == 0) throw DataError("fit_random_forest: empty training set");

  std::vector<std::shared_ptr<TreeModel>> trees;
  trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      rows = detail::weighted_bootstrap(w, rng);
      std::sort(rows.begin(), rows.end());
    } else {
      rows.resize(x.n_rows);
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    const bool subsampling = params.tree.feature_subsample < 1.0;
    trees.push_back(
        detail::fit_tree_impl(x, y, w, params.tree, 0.0, subsampling ? &rng : nullptr, &rows));
  }
  return std::make_shared<ForestModel>(x.names, std::move(trees));
}

}  // namespace salix
