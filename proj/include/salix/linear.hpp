#pragma once

#include <vector>

#include "salix/linalg.hpp"
#include "salix/model.hpp"

namespace salix {

class LinearModel final : public Model {
 public:
  LinearModel(std::vector<std::string> names, double intercept, std::vector<double> coef)
      : names_(std::move(names)), intercept_(intercept), coef_(std::move(coef)) {}

  std::string kind() const override { return "linear"; }
  const std::vector<std::string>& feature_names() const override { return names_; }

  double intercept() const { return intercept_; }
  const std::vector<double>& coefficients() const { return coef_; }

  nlohmann::json to_json() const override {
    return {{"kind", "linear"},
            {"version", 1},
            {"features", names_},
            {"intercept", intercept_},
            {"coef", coef_}};
  }

  static std::shared_ptr<LinearModel> from_json(const nlohmann::json& j) {
    return std::make_shared<LinearModel>(j.at("features").get<std::vector<std::string>>(),
                                         j.at("intercept").get<double>(),
                                         j.at("coef").get<std::vector<double>>());
  }

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& x) const override {
    std::vector<double> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) {
      double v = intercept_;
      const double* row = x.row(r);
      for (std::size_t j = 0; j < coef_.size(); ++j) v += coef_[j] * row[j];
      out[r] = v;
    }
    return out;
  }

 private:
  std::vector<std::string> names_;
  double intercept_;
  std::vector<double> coef_;
};

// Weighted least squares via normal equations, with a 1e-8 ridge jitter on
// the Gram diagonal so rank-deficient designs stay solvable.
inline ModelPtr fit_linear(const FeatureMatrix& x, const std::vector<double>& y,
                           const std::vector<double>& w) {
  detail::check_fit_inputs(x, y, w);
  if (x.n_rows < 2) throw DataError("fit_linear: need at least 2 rows");
  const std::size_t p = x.n_cols();

  std::vector<double> design(x.n_rows * (p + 1));
  for (std::size_t r = 0; r < x.n_rows; ++r) {
    design[r * (p + 1)] = 1.0;
    for (std::size_t j = 0; j < p; ++j) design[r * (p + 1) + j + 1] = x.at(r, j);
  }
  auto beta = linalg::weighted_least_squares(design, x.n_rows, p + 1, y, w, 1e-8);
  return std::make_shared<LinearModel>(
      x.names, beta[0], std::vector<double>(beta.begin() + 1, beta.end()));
}

}  // namespace salix
