#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "salix/linalg.hpp"
#include "salix/model.hpp"
#include "salix/rng.hpp"

namespace salix {

// Per-row feature contributions under the interventional value function:
// absent features are replaced by background-row values and averaged.
struct ShapExplanation {
  std::vector<std::string> features;
  std::vector<std::vector<double>> phi;  // one vector per explained row
  double base_value = 0.0;               // mean model output over the background
  std::string mode;                      // "exact" or "kernel"
  std::size_t background_rows = 0;
  double tolerance = 0.0;                // efficiency tolerance recorded for kernel mode

  nlohmann::json to_json() const {
    return {{"features", features}, {"phi", phi},       {"base_value", base_value},
            {"mode", mode},         {"background_rows", background_rows},
            {"tolerance", tolerance}};
  }
};

namespace detail {

// v(S): mean model output over background rows with features in S taken from
// x and the rest from the background row.
class CoalitionValue {
 public:
  CoalitionValue(const Model& model, const std::vector<double>& x, const FeatureMatrix& background)
      : model_(model), x_(x), background_(background) {
    if (background.n_rows == 0) throw DataError("shap: background must be non-empty");
    if (x.size() != background.n_cols()) throw DataError("shap: x length must match features");
    scratch_ = background;
  }

  double operator()(std::uint64_t mask) {
    auto it = cache_.find(mask);
    if (it != cache_.end()) return it->second;
    const std::size_t p = x_.size();
    for (std::size_t r = 0; r < background_.n_rows; ++r)
      for (std::size_t j = 0; j < p; ++j)
        scratch_.at(r, j) = (mask >> j) & 1u ? x_[j] : background_.at(r, j);
    const auto pred = model_.predict(scratch_);
    double mean = 0.0;
    for (double v : pred) mean += v;
    mean /= static_cast<double>(pred.size());
    cache_.emplace(mask, mean);
    return mean;
  }

 private:
  const Model& model_;
  const std::vector<double>& x_;
  const FeatureMatrix& background_;
  FeatureMatrix scratch_;
  std::map<std::uint64_t, double> cache_;
};

inline double factorial(unsigned n) {
  double f = 1.0;
  for (unsigned i = 2; i <= n; ++i) f *= i;
  return f;
}

inline double n_choose_k(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
  return r;
}

}  // namespace detail

// Exact Shapley values by subset enumeration:
// phi_j = sum over S not containing j of |S|!(p-|S|-1)!/p! [v(S+{j}) - v(S)].
// Guarded to p <= 15 (2^p coalition evaluations).
inline std::vector<double> shap_exact(const Model& model, const std::vector<double>& x,
                                      const FeatureMatrix& background) {
  const std::size_t p = background.n_cols();
  if (p > 15)
    throw ConfigError("shap_exact: " + std::to_string(p) +
                      " features exceeds the enumeration guard (15); use kernel mode");
  detail::CoalitionValue value(model, x, background);

  std::vector<double> size_weight(p);
  for (std::size_t s = 0; s < p; ++s)
    size_weight[s] =
        detail::factorial(static_cast<unsigned>(s)) *
        detail::factorial(static_cast<unsigned>(p - s - 1)) / detail::factorial(static_cast<unsigned>(p));

  std::vector<double> phi(p, 0.0);
  const std::uint64_t n_masks = 1ull << p;
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    const double v_s = value(mask);
    for (std::size_t j = 0; j < p; ++j) {
      if ((mask >> j) & 1u) continue;
      phi[j] += size_weight[size] * (value(mask | (1ull << j)) - v_s);
    }
  }
  return phi;
}

// Kernel SHAP: weighted least squares over sampled coalitions with the
// Shapley kernel weight (p-1)/(C(p,s) s (p-s)). Efficiency is enforced
// exactly by eliminating the last feature's contribution, and sampling is
// paired (every sampled coalition is added with its complement). Small
// coalition sizes are enumerated completely while the budget allows.
inline std::vector<double> shap_kernel(const Model& model, const std::vector<double>& x,
                                       const FeatureMatrix& background, std::size_t n_coalitions,
                                       std::uint64_t seed) {
  const std::size_t p = background.n_cols();
  if (p == 0) throw DataError("shap_kernel: no features");
  if (p > 62) throw ConfigError("shap_kernel: more than 62 features unsupported");
  if (n_coalitions < 2 * p + 2)
    throw ConfigError("shap_kernel: n_coalitions must be at least 2p+2");

  detail::CoalitionValue value(model, x, background);
  const double v_empty = value(0);
  const double v_full = value((p == 64 ? ~0ull : (1ull << p) - 1));

  if (p == 1) return {v_full - v_empty};  // single-player game

  // Kernel mass per coalition size, paired sizes (s, p-s) combined.
  const std::size_t n_sizes = (p - 1) / 2 + ((p - 1) % 2);  // ceil((p-1)/2)
  std::vector<double> size_mass(n_sizes + 1, 0.0);          // 1-based by s
  for (std::size_t s = 1; s <= n_sizes; ++s) {
    size_mass[s] = (p - 1.0) / (static_cast<double>(s) * static_cast<double>(p - s));
    if (s != p - s) size_mass[s] *= 2.0;  // complement size carries equal mass
  }

  std::map<std::uint64_t, double> weight_by_mask;
  std::vector<std::uint64_t> mask_order;  // insertion order, for determinism
  auto add_mask = [&](std::uint64_t mask, double w) {
    auto [it, inserted] = weight_by_mask.emplace(mask, w);
    if (inserted) mask_order.push_back(mask);
    else it->second += w;
  };

  std::size_t budget = n_coalitions;
  double remaining_mass = 0.0;
  for (std::size_t s = 1; s <= n_sizes; ++s) remaining_mass += size_mass[s];

  std::size_t first_sampled_size = n_sizes + 1;
  for (std::size_t s = 1; s <= n_sizes; ++s) {
    const bool paired = (s != p - s);
    double n_subsets = detail::n_choose_k(static_cast<unsigned>(p), static_cast<unsigned>(s));
    if (paired) n_subsets *= 2.0;
    const double share = static_cast<double>(budget) * size_mass[s] / remaining_mass;
    if (share < n_subsets || n_subsets > 1e7) {
      first_sampled_size = s;
      break;
    }
    // Enumerate every coalition of size s (and its complement).
    const double w_each = size_mass[s] / n_subsets;
    std::uint64_t mask = (1ull << s) - 1;
    const std::uint64_t limit = 1ull << p;
    while (mask < limit) {
      add_mask(mask, w_each);
      if (paired) add_mask(~mask & (limit - 1), w_each);
      // next bit permutation with the same popcount
      const std::uint64_t c = mask & (~mask + 1);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
    budget -= static_cast<std::size_t>(n_subsets);
    remaining_mass -= size_mass[s];
  }

  if (first_sampled_size <= n_sizes && budget > 0) {
    // Random phase over the remaining sizes, proportional to kernel mass.
    std::vector<double> cdf;
    std::vector<std::size_t> sizes;
    double acc = 0.0;
    for (std::size_t s = first_sampled_size; s <= n_sizes; ++s) {
      acc += size_mass[s];
      cdf.push_back(acc);
      sizes.push_back(s);
    }
    Rng rng = Rng::stream(seed, "kernel-shap");
    std::map<std::uint64_t, double> sampled_count;
    std::vector<std::uint64_t> sampled_order;
    std::size_t n_sampled = 0;
    while (n_sampled + 2 <= budget) {
      const double u = rng.uniform01() * acc;
      const std::size_t si =
          static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      const std::size_t s = sizes[std::min(si, sizes.size() - 1)];
      auto chosen = rng.sample_without_replacement(p, s);
      std::uint64_t mask = 0;
      for (auto j : chosen) mask |= 1ull << j;
      const std::uint64_t comp = ~mask & ((1ull << p) - 1);
      for (auto m : {mask, comp}) {
        auto [it, inserted] = sampled_count.emplace(m, 1.0);
        if (inserted) sampled_order.push_back(m);
        else it->second += 1.0;
      }
      n_sampled += 2;
    }
    if (n_sampled > 0) {
      const double scale = remaining_mass / static_cast<double>(n_sampled);
      for (auto m : sampled_order) add_mask(m, sampled_count[m] * scale);
    }
  }

  if (weight_by_mask.empty()) throw NumericError("shap_kernel: no coalitions sampled");

  // Constrained WLS: phi_0 = v_empty and sum phi = v_full - v_empty are
  // enforced by eliminating the last feature's coefficient.
  const std::size_t q = p - 1;
  const double span = v_full - v_empty;
  std::vector<double> design;
  design.reserve(mask_order.size() * q);
  std::vector<double> target(mask_order.size()), weights(mask_order.size());
  for (std::size_t i = 0; i < mask_order.size(); ++i) {
    const std::uint64_t mask = mask_order[i];
    const double z_last = (mask >> (p - 1)) & 1u ? 1.0 : 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      const double z_j = (mask >> j) & 1u ? 1.0 : 0.0;
      design.push_back(z_j - z_last);
    }
    target[i] = value(mask) - v_empty - z_last * span;
    weights[i] = weight_by_mask[mask];
  }

  std::vector<double> phi_head;
  try {
    phi_head = linalg::weighted_least_squares(design, mask_order.size(), q, target, weights, 0.0);
  } catch (const NumericError&) {
    throw NumericError("shap_kernel: singular regression system; increase n_coalitions");
  }

  std::vector<double> phi(p, 0.0);
  double head_sum = 0.0;
  for (std::size_t j = 0; j < q; ++j) {
    phi[j] = phi_head[j];
    head_sum += phi_head[j];
  }
  phi[p - 1] = span - head_sum;
  return phi;
}

// Seeded uniform subsample of at most max_rows background rows.
inline FeatureMatrix background_sample(const FeatureMatrix& x, std::size_t max_rows,
                                       std::uint64_t seed) {
  if (x.n_rows <= max_rows) return x;
  Rng rng = Rng::stream(seed, "shap-background");
  auto rows = rng.sample_without_replacement(x.n_rows, max_rows);
  std::sort(rows.begin(), rows.end());
  return x.select_rows(rows);
}

enum class ShapMode { Exact, Kernel };

// Mean-|phi| ranking over a set of rows, with the per-row matrix retained
// for the beeswarm-style export.
inline std::pair<std::vector<double>, ShapExplanation> shap_summary(
    const Model& model, const FeatureMatrix& rows, const FeatureMatrix& background, ShapMode mode,
    std::size_t n_coalitions, std::uint64_t seed) {
  if (rows.n_rows == 0) throw DataError("shap_summary: no rows to explain");
  const std::size_t p = background.n_cols();

  ShapExplanation expl;
  expl.features = background.names;
  expl.mode = mode == ShapMode::Exact ? "exact" : "kernel";
  expl.background_rows = background.n_rows;
  {
    const auto base_pred = model.predict(background);
    double mean = 0.0;
    for (double v : base_pred) mean += v;
    expl.base_value = mean / static_cast<double>(base_pred.size());
  }
  expl.tolerance = mode == ShapMode::Exact ? 1e-9 : 0.0;  // kernel efficiency is exact by constraint

  std::vector<double> mean_abs(p, 0.0);
  for (std::size_t r = 0; r < rows.n_rows; ++r) {
    std::vector<double> x(rows.row(r), rows.row(r) + p);
    std::vector<double> phi = mode == ShapMode::Exact
                                  ? shap_exact(model, x, background)
                                  : shap_kernel(model, x, background, n_coalitions, seed + r);
    for (std::size_t j = 0; j < p; ++j) mean_abs[j] += std::fabs(phi[j]);
    expl.phi.push_back(std::move(phi));
  }
  for (auto& v : mean_abs) v /= static_cast<double>(rows.n_rows);
  return {std::move(mean_abs), std::move(expl)};
}

}  // namespace salix
