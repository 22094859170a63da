#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "salix/errors.hpp"
#include "salix/stats.hpp"

namespace salix {

struct EvalReport {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> r2;  // absent when the target has zero variance
  std::size_t n = 0;
  bool weighted = false;

  nlohmann::json to_json() const {
    nlohmann::json j{{"mae", mae}, {"rmse", rmse}, {"n", n}, {"weighted", weighted}};
    if (r2) j["r2"] = *r2;
    else j["r2"] = nullptr;
    return j;
  }
};

// MAE = sum w|e|/sum w, RMSE = sqrt(sum w e^2/sum w),
// R^2 = 1 - sum w e^2 / sum w (y - weighted mean y)^2.
inline EvalReport evaluate(const std::vector<double>& y, const std::vector<double>& yhat,
                           const std::vector<double>* w = nullptr) {
  if (y.size() != yhat.size() || y.empty())
    throw DataError("evaluate: y and yhat must have equal length >= 1");
  if (w && w->size() != y.size()) throw DataError("evaluate: weights length mismatch");

  double sw = 0.0, sae = 0.0, sse = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w ? (*w)[i] : 1.0;
    const double e = y[i] - yhat[i];
    sw += wi;
    sae += wi * std::fabs(e);
    sse += wi * e * e;
    swy += wi * y[i];
  }
  if (sw <= 0.0) throw DataError("evaluate: nonpositive total weight");
  const double ybar = swy / sw;
  double sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w ? (*w)[i] : 1.0;
    sst += wi * (y[i] - ybar) * (y[i] - ybar);
  }

  EvalReport rep;
  rep.mae = sae / sw;
  rep.rmse = std::sqrt(sse / sw);
  rep.n = y.size();
  rep.weighted = w != nullptr;
  if (sst > 0.0) rep.r2 = 1.0 - sse / sst;
  return rep;
}

// Spearman rho: Pearson correlation of average ranks, ties receiving the
// mean of their rank range. An all-tied argument has no defined ranking.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DataError("spearman: need two equal-length vectors, n >= 2");
  const auto ra = stats::average_ranks(a);
  const auto rb = stats::average_ranks(b);
  const double rho = stats::pearson(ra, rb);
  if (std::isnan(rho)) return std::nullopt;
  return rho;
}

}  // namespace salix
