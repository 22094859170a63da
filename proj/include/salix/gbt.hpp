#pragma once

#include <vector>

#include "salix/tree.hpp"

namespace salix {

struct GbtParams {
  int n_rounds = 200;
  double learning_rate = 0.1;
  TreeParams tree{.max_depth = 4, .min_samples_leaf = 1};
  double l2_leaf = 1.0;

  void validate() const {
    if (n_rounds < 1) throw ConfigError("gbt: n_rounds must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw ConfigError("gbt: learning_rate must be in (0,1]");
    if (l2_leaf < 0.0) throw ConfigError("gbt: l2_leaf must be >= 0");
    tree.validate();
  }

  nlohmann::json to_json() const {
    return {{"n_rounds", n_rounds},
            {"learning_rate", learning_rate},
            {"tree", tree.to_json()},
            {"l2_leaf", l2_leaf}};
  }
  static GbtParams from_json(const nlohmann::json& j) {
    GbtParams p;
    p.n_rounds = j.value("n_rounds", p.n_rounds);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    if (j.contains("tree")) p.tree = TreeParams::from_json(j["tree"]);
    p.l2_leaf = j.value("l2_leaf", p.l2_leaf);
    return p;
  }
};

class GbtModel final : public Model {
 public:
  GbtModel(std::vector<std::string> names, double base, double learning_rate,
           std::vector<std::shared_ptr<TreeModel>> trees, std::vector<double> training_mse)
      : names_(std::move(names)),
        base_(base),
        learning_rate_(learning_rate),
        trees_(std::move(trees)),
        training_mse_(std::move(training_mse)) {}

  std::string kind() const override { return "gbt"; }
  const std::vector<std::string>& feature_names() const override { return names_; }
  const std::vector<std::shared_ptr<TreeModel>>& trees() const { return trees_; }
  double base_value() const { return base_; }

  // Weighted training MSE after each boosting round (round 0 = base only).
  const std::vector<double>& training_mse() const { return training_mse_; }

  nlohmann::json to_json() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees_) arr.push_back(t->to_json());
    return {{"kind", "gbt"},
            {"version", 1},
            {"features", names_},
            {"base", base_},
            {"learning_rate", learning_rate_},
            {"trees", arr},
            {"training_mse", training_mse_}};
  }

  static std::shared_ptr<GbtModel> from_json(const nlohmann::json& j) {
    std::vector<std::shared_ptr<TreeModel>> trees;
    for (const auto& e : j.at("trees")) trees.push_back(TreeModel::from_json(e));
    return std::make_shared<GbtModel>(j.at("features").get<std::vector<std::string>>(),
                                      j.at("base").get<double>(),
                                      j.at("learning_rate").get<double>(), std::move(trees),
                                      j.at("training_mse").get<std::vector<double>>());
  }

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& x) const override {
    std::vector<double> out(x.n_rows, base_);
    for (const auto& t : trees_)
      for (std::size_t r = 0; r < x.n_rows; ++r)
        out[r] += learning_rate_ * t->predict_one(x.row(r));
    return out;
  }

 private:
  std::vector<std::string> names_;
  double base_;
  double learning_rate_;
  std::vector<std::shared_ptr<TreeModel>> trees_;
  std::vector<double> training_mse_;
};

// Squared-error boosting: stage 0 is the weighted mean, then each round fits
// a tree to the current residuals with leaves shrunk by the L2 regularizer
// (leaf = sum(w*r)/(sum(w)+lambda)) and steps by learning_rate.
inline ModelPtr fit_gbt(const FeatureMatrix& x, const std::vector<double>& y,
                        const std::vector<double>& w, const GbtParams& params = {},
                        std::uint64_t seed = 0) {
  detail::check_fit_inputs(x, y, w);
  params.validate();
  if (x.n_rows == 0) throw DataError("fit_gbt: empty training set");

  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    swy += w[i] * y[i];
  }
  if (sw <= 0.0) throw DataError("fit_gbt: total weight must be positive");
  const double base = swy / sw;

  std::vector<double> pred(y.size(), base);
  std::vector<double> residual(y.size());
  auto weighted_mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * (y[i] - pred[i]) * (y[i] - pred[i]);
    return s / sw;
  };

  std::vector<double> mse_per_round;
  mse_per_round.reserve(static_cast<std::size_t>(params.n_rounds) + 1);
  mse_per_round.push_back(weighted_mse());

  std::vector<std::shared_ptr<TreeModel>> trees;
  trees.reserve(static_cast<std::size_t>(params.n_rounds));
  const bool subsampling = params.tree.feature_subsample < 1.0;
  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - pred[i];
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(round) + 0x9000);
    auto tree = detail::fit_tree_impl(x, residual, w, params.tree, params.l2_leaf,
                                      subsampling ? &rng : nullptr);
    for (std::size_t i = 0; i < y.size(); ++i)
      pred[i] += params.learning_rate * tree->predict_one(x.row(i));
    trees.push_back(std::move(tree));
    mse_per_round.push_back(weighted_mse());
  }
  return std::make_shared<GbtModel>(x.names, base, params.learning_rate, std::move(trees),
                                    std::move(mse_per_round));
}

}  // namespace salix
