#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "salix/errors.hpp"
#include "salix/linalg.hpp"

namespace salix {

// Uniform fit/predict contract over every regressor kind. Models are
// immutable after fit and safe to share across threads.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string kind() const = 0;
  virtual const std::vector<std::string>& feature_names() const = 0;
  virtual nlohmann::json to_json() const = 0;

  // One finite prediction per row; pure function of (model, X).
  std::vector<double> predict(const FeatureMatrix& x) const {
    check_features(x);
    return predict_impl(x);
  }

  double predict_row(const std::vector<double>& row) const {
    FeatureMatrix m;
    m.names = feature_names();
    m.n_rows = 1;
    m.data = row;
    return predict(m)[0];
  }

 protected:
  virtual std::vector<double> predict_impl(const FeatureMatrix& x) const = 0;

  void check_features(const FeatureMatrix& x) const {
    const auto& expected = feature_names();
    if (x.names == expected) return;
    std::string msg = "feature mismatch:";
    for (const auto& n : x.names)
      if (std::find(expected.begin(), expected.end(), n) == expected.end())
        msg += " unexpected '" + n + "'";
    for (const auto& n : expected)
      if (std::find(x.names.begin(), x.names.end(), n) == x.names.end())
        msg += " missing '" + n + "'";
    if (msg == "feature mismatch:") msg += " columns out of training order";
    throw DataError(msg);
  }
};

using ModelPtr = std::shared_ptr<const Model>;

// Adapts a plain callable to the predictor contract; used for analytic
// test functions and for algebraic combinations of models.
class FunctionModel final : public Model {
 public:
  using Fn = std::function<double(const double*)>;

  FunctionModel(std::vector<std::string> names, Fn fn)
      : names_(std::move(names)), fn_(std::move(fn)) {}

  std::string kind() const override { return "function"; }
  const std::vector<std::string>& feature_names() const override { return names_; }
  nlohmann::json to_json() const override {
    throw ConfigError("function-backed models are not serializable");
  }

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& x) const override {
    std::vector<double> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = fn_(x.row(r));
    return out;
  }

 private:
  std::vector<std::string> names_;
  Fn fn_;
};

namespace detail {

inline void check_fit_inputs(const FeatureMatrix& x, const std::vector<double>& y,
                             const std::vector<double>& w) {
  if (x.n_rows != y.size() || x.n_rows != w.size())
    throw DataError("fit: X rows, y and w must have equal length");
  for (double v : x.data)
    if (!std::isfinite(v)) throw DataError("fit: X contains non-finite values");
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("fit: y contains non-finite values");
  for (double v : w)
    if (!(v >= 0.0)) throw DataError("fit: weights must be nonnegative");
}

}  // namespace detail
}  // namespace salix
