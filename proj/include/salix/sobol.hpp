#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "salix/model.hpp"
#include "salix/rng.hpp"
#include "salix/sobol_directions.hpp"

namespace salix {

// Sobol low-discrepancy sequence (32-bit, Joe-Kuo direction numbers),
// generated by Gray-code updates. The zero point is skipped, so the first
// point drawn is (0.5, ..., 0.5). An optional digital scramble XORs every
// coordinate with a per-dimension random shift.
class SobolSequence {
 public:
  explicit SobolSequence(std::size_t dims, std::uint64_t scramble_seed = 0,
                         bool scramble = false)
      : dims_(dims), x_(dims, 0), shift_(dims, 0) {
    if (dims == 0) throw ConfigError("sobol: need at least one dimension");
    if (dims > static_cast<std::size_t>(detail::kSobolMaxDim))
      throw ConfigError("sobol: at most " + std::to_string(detail::kSobolMaxDim) +
                        " dimensions supported");
    directions_.assign(dims, {});
    for (std::size_t d = 0; d < dims; ++d) compute_directions(d);
    if (scramble) {
      Rng rng = Rng::stream(scramble_seed, "sobol-scramble");
      for (auto& s : shift_) s = static_cast<std::uint32_t>(rng.next_u64() >> 32);
    }
  }

  std::size_t dims() const { return dims_; }

  // Next point, coordinates in [0, 1).
  void next(double* out) {
    ++index_;
    const unsigned bit = static_cast<unsigned>(std::countr_zero(index_));
    for (std::size_t d = 0; d < dims_; ++d) {
      x_[d] ^= directions_[d][bit];
      out[d] = static_cast<double>(x_[d] ^ shift_[d]) * 0x1.0p-32;
    }
  }

 private:
  void compute_directions(std::size_t d) {
    auto& v = directions_[d];
    if (d == 0) {  // van der Corput
      for (unsigned k = 0; k < 32; ++k) v[k] = 1u << (31 - k);
      return;
    }
    const auto& entry = detail::kSobolDirections[d - 1];
    const unsigned s = entry.degree;
    for (unsigned k = 0; k < s && k < 32; ++k) v[k] = entry.m[k] << (31 - k);
    for (unsigned k = s; k < 32; ++k) {
      std::uint32_t vk = v[k - s] ^ (v[k - s] >> s);
      for (unsigned j = 1; j < s; ++j)
        if ((entry.poly >> (s - j)) & 1u) vk ^= v[k - j];
      v[k] = vk;
    }
  }

  std::size_t dims_;
  std::uint64_t index_ = 0;
  std::vector<std::array<std::uint32_t, 32>> directions_;
  std::vector<std::uint32_t> x_;
  std::vector<std::uint32_t> shift_;
};

// Saltelli design: A and B from one 2p-dimensional Sobol stream, plus the
// p matrices A_B^(i) (A with column i replaced by B's). Evaluating a model
// over the whole design costs n_base * (p + 2) rows.
struct SobolDesign {
  FeatureMatrix a;
  FeatureMatrix b;
  std::vector<FeatureMatrix> ab;
  std::vector<std::array<double, 2>> bounds;
  std::size_t n_base = 0;

  std::size_t total_rows() const { return n_base * (ab.size() + 2); }
};

inline SobolDesign sobol_design(const std::vector<std::string>& names,
                                const std::vector<std::array<double, 2>>& bounds,
                                std::size_t n_base, std::uint64_t seed = 0,
                                bool scramble = false) {
  const std::size_t p = names.size();
  if (p == 0 || bounds.size() != p) throw ConfigError("sobol_design: names/bounds mismatch");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw DataError("sobol_design: degenerate bounds, need lo < hi");
  if (n_base == 0 || (n_base & (n_base - 1)) != 0)
    throw ConfigError("sobol_design: n_base must be a power of 2");

  SobolDesign design;
  design.bounds = bounds;
  design.n_base = n_base;
  design.a = FeatureMatrix::zeros(names, n_base);
  design.b = FeatureMatrix::zeros(names, n_base);

  SobolSequence seq(2 * p, seed, scramble);
  std::vector<double> point(2 * p);
  for (std::size_t r = 0; r < n_base; ++r) {
    seq.next(point.data());
    for (std::size_t j = 0; j < p; ++j) {
      design.a.at(r, j) = bounds[j][0] + (bounds[j][1] - bounds[j][0]) * point[j];
      design.b.at(r, j) = bounds[j][0] + (bounds[j][1] - bounds[j][0]) * point[p + j];
    }
  }
  design.ab.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    FeatureMatrix m = design.a;
    for (std::size_t r = 0; r < n_base; ++r) m.at(r, i) = design.b.at(r, i);
    design.ab.push_back(std::move(m));
  }
  return design;
}

struct SobolIndices {
  std::vector<std::string> features;
  std::vector<double> s1, st;
  std::vector<double> s1_lo, s1_hi, st_lo, st_hi;
  std::size_t n_base = 0;
  std::size_t evals = 0;
  bool constant_model = false;  // model variance below tolerance, indices forced to 0

  nlohmann::json to_json() const {
    nlohmann::json features_json = nlohmann::json::array();
    for (std::size_t i = 0; i < features.size(); ++i) {
      features_json.push_back({{"feature", features[i]},
                               {"s1", s1[i]},
                               {"s1_ci", {s1_lo[i], s1_hi[i]}},
                               {"st", st[i]},
                               {"st_ci", {st_lo[i], st_hi[i]}}});
    }
    return {{"indices", features_json},
            {"n_base", n_base},
            {"evals", evals},
            {"constant_model", constant_model}};
  }
};

namespace detail {

struct SobolAccumulator {
  // Per-feature estimates from a set of base-sample indices.
  static void estimate(const std::vector<double>& fa, const std::vector<double>& fb,
                       const std::vector<std::vector<double>>& fab,
                       const std::vector<std::size_t>& rows, std::vector<double>& s1,
                       std::vector<double>& st) {
    const std::size_t p = fab.size();
    const std::size_t n = rows.size();
    double mean = 0.0;
    for (auto r : rows) mean += fa[r] + fb[r];
    mean /= static_cast<double>(2 * n);
    double var = 0.0;
    for (auto r : rows) {
      var += (fa[r] - mean) * (fa[r] - mean);
      var += (fb[r] - mean) * (fb[r] - mean);
    }
    var /= static_cast<double>(2 * n);

    s1.assign(p, 0.0);
    st.assign(p, 0.0);
    if (var < 1e-12) return;
    for (std::size_t i = 0; i < p; ++i) {
      double acc1 = 0.0, acct = 0.0;
      for (auto r : rows) {
        acc1 += fb[r] * (fab[i][r] - fa[r]);  // Saltelli-2010 first-order form
        const double d = fa[r] - fab[i][r];   // Jansen total-order form
        acct += d * d;
      }
      s1[i] = acc1 / (static_cast<double>(n) * var);
      st[i] = acct / (2.0 * static_cast<double>(n) * var);
    }
  }
};

}  // namespace detail

// First- and total-order Sobol indices with percentile-bootstrap 95%
// intervals over the n_base base samples. A model whose outputs have
// variance below 1e-12 over A and B reports all indices as 0 with the
// constant_model flag set.
inline SobolIndices sobol_indices(const Model& model, const SobolDesign& design,
                                  std::size_t n_bootstrap = 200, std::uint64_t seed = 0) {
  const std::size_t p = design.ab.size();
  const std::size_t n = design.n_base;

  const std::vector<double> fa = model.predict(design.a);
  const std::vector<double> fb = model.predict(design.b);
  std::vector<std::vector<double>> fab(p);
  for (std::size_t i = 0; i < p; ++i) fab[i] = model.predict(design.ab[i]);

  SobolIndices out;
  out.features = design.a.names;
  out.n_base = n;
  out.evals = design.total_rows();

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  double mean = 0.0, var = 0.0;
  for (std::size_t r = 0; r < n; ++r) mean += fa[r] + fb[r];
  mean /= static_cast<double>(2 * n);
  for (std::size_t r = 0; r < n; ++r)
    var += (fa[r] - mean) * (fa[r] - mean) + (fb[r] - mean) * (fb[r] - mean);
  var /= static_cast<double>(2 * n);
  if (var < 1e-12) {
    out.constant_model = true;
    out.s1.assign(p, 0.0);
    out.st.assign(p, 0.0);
    out.s1_lo.assign(p, 0.0);
    out.s1_hi.assign(p, 0.0);
    out.st_lo.assign(p, 0.0);
    out.st_hi.assign(p, 0.0);
    return out;
  }

  detail::SobolAccumulator::estimate(fa, fb, fab, all, out.s1, out.st);

  // Percentile bootstrap over base-sample indices; the point estimate is
  // included so ci_low <= point <= ci_high holds by construction.
  std::vector<std::vector<double>> s1_samples(p), st_samples(p);
  for (std::size_t i = 0; i < p; ++i) {
    s1_samples[i].push_back(out.s1[i]);
    st_samples[i].push_back(out.st[i]);
  }
  Rng rng = Rng::stream(seed, "sobol-bootstrap");
  std::vector<std::size_t> resample(n);
  std::vector<double> s1_b, st_b;
  for (std::size_t b = 0; b < n_bootstrap; ++b) {
    for (auto& r : resample) r = static_cast<std::size_t>(rng.uniform_int(n));
    detail::SobolAccumulator::estimate(fa, fb, fab, resample, s1_b, st_b);
    for (std::size_t i = 0; i < p; ++i) {
      s1_samples[i].push_back(s1_b[i]);
      st_samples[i].push_back(st_b[i]);
    }
  }
  auto percentile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  for (std::size_t i = 0; i < p; ++i) {
    out.s1_lo.push_back(std::min(out.s1[i], percentile(s1_samples[i], 0.025)));
    out.s1_hi.push_back(std::max(out.s1[i], percentile(s1_samples[i], 0.975)));
    out.st_lo.push_back(std::min(out.st[i], percentile(st_samples[i], 0.025)));
    out.st_hi.push_back(std::max(out.st[i], percentile(st_samples[i], 0.975)));
  }
  return out;
}

}  // namespace salix
