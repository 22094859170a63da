#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "salix/errors.hpp"

namespace salix {

// Row-major numeric matrix with named columns; the common currency between
// datasets, models and the attribution methods.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t n_rows = 0;
  std::vector<double> data;  // n_rows * names.size(), row-major

  std::size_t n_cols() const { return names.size(); }

  double& at(std::size_t row, std::size_t col) { return data[row * names.size() + col]; }
  double at(std::size_t row, std::size_t col) const { return data[row * names.size() + col]; }

  const double* row(std::size_t r) const { return data.data() + r * names.size(); }

  std::vector<double> column(std::size_t col) const {
    std::vector<double> out(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = at(r, col);
    return out;
  }

  static FeatureMatrix zeros(std::vector<std::string> names, std::size_t n_rows) {
    FeatureMatrix m;
    m.names = std::move(names);
    m.n_rows = n_rows;
    m.data.assign(n_rows * m.names.size(), 0.0);
    return m;
  }

  FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const {
    FeatureMatrix out;
    out.names = names;
    out.n_rows = rows.size();
    out.data.reserve(rows.size() * names.size());
    for (std::size_t r : rows)
      out.data.insert(out.data.end(), row(r), row(r) + names.size());
    return out;
  }
};

namespace linalg {

// In-place Cholesky solve of A x = b for symmetric positive definite A
// (dense, column count small: normal equations, kernel regressions).
// Throws NumericError if A is not positive definite.
inline std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b,
                                          std::size_t n) {
  // Factor A = L L^T, L lower triangular stored in a.
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) throw NumericError("cholesky: matrix not positive definite");
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  // Forward substitution L y = b.
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  // Back substitution L^T x = y.
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
    b[ii] = s / a[ii * n + ii];
  }
  return b;
}

// Weighted least squares for y ~ X beta (X already includes any intercept
// column). Adds `ridge` to the Gram diagonal before solving.
inline std::vector<double> weighted_least_squares(const std::vector<double>& x,
                                                  std::size_t n_rows, std::size_t n_cols,
                                                  const std::vector<double>& y,
                                                  const std::vector<double>& w,
                                                  double ridge) {
  std::vector<double> gram(n_cols * n_cols, 0.0);
  std::vector<double> rhs(n_cols, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double* row = x.data() + r * n_cols;
    const double wr = w.empty() ? 1.0 : w[r];
    for (std::size_t i = 0; i < n_cols; ++i) {
      const double wxi = wr * row[i];
      rhs[i] += wxi * y[r];
      for (std::size_t j = i; j < n_cols; ++j) gram[i * n_cols + j] += wxi * row[j];
    }
  }
  for (std::size_t i = 0; i < n_cols; ++i) {
    gram[i * n_cols + i] += ridge;
    for (std::size_t j = 0; j < i; ++j) gram[i * n_cols + j] = gram[j * n_cols + i];
  }
  return cholesky_solve(std::move(gram), std::move(rhs), n_cols);
}

}  // namespace linalg
}  // namespace salix
