#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "salix/model.hpp"
#include "salix/rng.hpp"

namespace salix {

struct TreeParams {
  int max_depth = 6;
  int min_samples_leaf = 1;
  double min_weighted_samples_split = 0.0;
  double feature_subsample = 1.0;  // fraction of features tried per split

  void validate() const {
    if (max_depth < 1) throw ConfigError("tree: max_depth must be >= 1");
    if (min_samples_leaf < 1) throw ConfigError("tree: min_samples_leaf must be >= 1");
    if (!(feature_subsample > 0.0 && feature_subsample <= 1.0))
      throw ConfigError("tree: feature_subsample must be in (0,1]");
  }

  nlohmann::json to_json() const {
    return {{"max_depth", max_depth},
            {"min_samples_leaf", min_samples_leaf},
            {"min_weighted_samples_split", min_weighted_samples_split},
            {"feature_subsample", feature_subsample}};
  }
  static TreeParams from_json(const nlohmann::json& j) {
    TreeParams p;
    p.max_depth = j.value("max_depth", p.max_depth);
    p.min_samples_leaf = j.value("min_samples_leaf", p.min_samples_leaf);
    p.min_weighted_samples_split = j.value("min_weighted_samples_split", p.min_weighted_samples_split);
    p.feature_subsample = j.value("feature_subsample", p.feature_subsample);
    return p;
  }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

class TreeModel final : public Model {
 public:
  TreeModel(std::vector<std::string> names, std::vector<TreeNode> nodes,
            std::vector<double> gain_by_feature)
      : names_(std::move(names)),
        nodes_(std::move(nodes)),
        gain_by_feature_(std::move(gain_by_feature)) {}

  std::string kind() const override { return "tree"; }
  const std::vector<std::string>& feature_names() const override { return names_; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  // Total weighted squared-error reduction credited to each feature.
  const std::vector<double>& split_gains() const { return gain_by_feature_; }

  double predict_one(const double* row) const {
    int i = 0;
    while (nodes_[i].feature >= 0)
      i = row[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return nodes_[i].value;
  }

  nlohmann::json to_json() const override {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : nodes_)
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return {{"kind", "tree"},
            {"version", 1},
            {"features", names_},
            {"nodes", nodes},
            {"split_gains", gain_by_feature_}};
  }

  static std::shared_ptr<TreeModel> from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    for (const auto& e : j.at("nodes")) {
      TreeNode n;
      n.feature = e.at(0).get<int>();
      n.threshold = e.at(1).get<double>();
      n.left = e.at(2).get<int>();
      n.right = e.at(3).get<int>();
      n.value = e.at(4).get<double>();
      nodes.push_back(n);
    }
    return std::make_shared<TreeModel>(j.at("features").get<std::vector<std::string>>(),
                                       std::move(nodes),
                                       j.at("split_gains").get<std::vector<double>>());
  }

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& x) const override {
    std::vector<double> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = predict_one(x.row(r));
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<TreeNode> nodes_;
  std::vector<double> gain_by_feature_;
};

namespace detail {

// CART builder: greedy weighted squared-error splits, leaf value
// sum(w*y)/(sum(w)+lambda). lambda=0 gives the plain weighted mean;
// boosting passes its L2 leaf regularizer.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const std::vector<double>& y, const std::vector<double>& w,
              const TreeParams& params, double leaf_lambda, Rng* rng)
      : x_(x), y_(y), w_(w), params_(params), leaf_lambda_(leaf_lambda), rng_(rng) {
    gain_by_feature_.assign(x.n_cols(), 0.0);
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    nodes_.clear();
    build_node(std::move(rows), 1);
    return std::move(nodes_);
  }

  std::vector<double> take_gains() { return std::move(gain_by_feature_); }

 private:
  struct NodeStats {
    double sw = 0, swy = 0, swyy = 0;
    double sse() const { return sw > 0 ? std::max(0.0, swyy - swy * swy / sw) : 0.0; }
  };

  NodeStats stats_for(const std::vector<std::size_t>& rows) const {
    NodeStats s;
    for (auto r : rows) {
      s.sw += w_[r];
      s.swy += w_[r] * y_[r];
      s.swyy += w_[r] * y_[r] * y_[r];
    }
    return s;
  }

  double leaf_value(const NodeStats& s) const {
    const double denom = s.sw + leaf_lambda_;
    return denom > 0 ? s.swy / denom : 0.0;
  }

  int make_leaf(const NodeStats& s) {
    TreeNode n;
    n.value = leaf_value(s);
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size() - 1);
  }

  int build_node(std::vector<std::size_t> rows, int depth) {
    const NodeStats stats = stats_for(rows);
    const std::size_t n = rows.size();
    if (depth > params_.max_depth || n < 2 * static_cast<std::size_t>(params_.min_samples_leaf) ||
        stats.sw < params_.min_weighted_samples_split || stats.sse() <= 1e-12)
      return make_leaf(stats);

    const std::size_t p = x_.n_cols();
    std::vector<std::size_t> candidates(p);
    for (std::size_t j = 0; j < p; ++j) candidates[j] = j;
    const auto mtry =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::ceil(params_.feature_subsample * static_cast<double>(p))));
    if (mtry < p && rng_) {
      candidates = rng_->sample_without_replacement(p, mtry);
      std::sort(candidates.begin(), candidates.end());
    }

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 0.0;
    std::vector<std::pair<double, std::size_t>> sorted;
    sorted.reserve(n);
    for (std::size_t f : candidates) {
      sorted.clear();
      for (auto r : rows) sorted.emplace_back(x_.at(r, f), r);
      std::sort(sorted.begin(), sorted.end());

      NodeStats left;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto r = sorted[i].second;
        left.sw += w_[r];
        left.swy += w_[r] * y_[r];
        left.swyy += w_[r] * y_[r] * y_[r];
        if (sorted[i].first == sorted[i + 1].first) continue;  // only between distinct values
        const std::size_t n_left = i + 1, n_right = n - n_left;
        if (n_left < static_cast<std::size_t>(params_.min_samples_leaf) ||
            n_right < static_cast<std::size_t>(params_.min_samples_leaf))
          continue;
        NodeStats right{stats.sw - left.sw, stats.swy - left.swy, stats.swyy - left.swyy};
        const double gain = stats.sse() - left.sse() - right.sse();
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        }
      }
    }

    if (best_feature < 0) return make_leaf(stats);
    gain_by_feature_[static_cast<std::size_t>(best_feature)] += best_gain;

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows)
      (x_.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    TreeNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    nodes_.push_back(node);
    const int self = static_cast<int>(nodes_.size() - 1);
    const int left_id = build_node(std::move(left_rows), depth + 1);
    const int right_id = build_node(std::move(right_rows), depth + 1);
    nodes_[self].left = left_id;
    nodes_[self].right = right_id;
    return self;
  }

  const FeatureMatrix& x_;
  const std::vector<double>& y_;
  const std::vector<double>& w_;
  const TreeParams& params_;
  double leaf_lambda_;
  Rng* rng_;
  std::vector<TreeNode> nodes_;
  std::vector<double> gain_by_feature_;
};

inline std::shared_ptr<TreeModel> fit_tree_impl(const FeatureMatrix& x,
                                                const std::vector<double>& y,
                                                const std::vector<double>& w,
                                                const TreeParams& params, double leaf_lambda,
                                                Rng* rng,
                                                const std::vector<std::size_t>* rows = nullptr) {
  params.validate();
  std::vector<std::size_t> all;
  if (!rows) {
    all.resize(x.n_rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rows = &all;
  }
  TreeBuilder builder(x, y, w, params, leaf_lambda, rng);
  auto nodes = builder.build(*rows);
  return std::make_shared<TreeModel>(x.names, std::move(nodes), builder.take_gains());
}

}  // namespace detail

inline ModelPtr fit_tree(const FeatureMatrix& x, const std::vector<double>& y,
                         const std::vector<double>& w, const TreeParams& params = {},
                         std::uint64_t seed = 0) {
  detail::check_fit_inputs(x, y, w);
  if (x.n_rows == 0) throw DataError("fit_tree: empty training set");
  Rng rng = Rng::stream(seed, "tree");
  return detail::fit_tree_impl(x, y, w, params, 0.0, params.feature_subsample < 1.0 ? &rng : nullptr);
}

}  // namespace salix
