// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <fel/errors.hpp>
#include <fel/grid.hpp>

namespace fel {

/// Semi-metric between curves: either the L2 distance of k-th derivatives
/// (k = 0 compares raw curves) or the Euclidean distance of projection
/// scores onto fitted functional principal components.
///
/// Every spec admits a feature embedding f such that
///   d(a, b) == || f(a) - f(b) ||_2,
/// which callers can use to precompute distances in bulk.
class SemiMetricSpec {
 public:
  enum class Kind { deriv_l2, pca };

  /// Quadrature-weighted L2 distance between order-k derivatives.
  static SemiMetricSpec deriv_l2(int order) {
    if (order < 0) throw InvalidArgument("derivative order must be >= 0");
    SemiMetricSpec s;
    s.kind_ = Kind::deriv_l2;
    s.order_ = order;
    return s;
  }

  /// Unfitted PCA semi-metric with q components; fit with
  /// fit_pca_semimetric before use.
  static SemiMetricSpec pca(int components) {
    if (components < 1) throw InvalidComponents("pca needs >= 1 component");
    SemiMetricSpec s;
    s.kind_ = Kind::pca;
    s.q_ = components;
    return s;
  }

  Kind kind() const { return kind_; }
  int derivative_order() const { return order_; }
  int components() const { return q_; }
  bool fitted() const { return kind_ == Kind::deriv_l2 || !basis_.empty(); }

  /// Eigenvalues of the fitted covariance, nonincreasing. PCA only.
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  /// Embedding with d(a,b) = ||f(a) - f(b)||. For deriv_l2 these are the
  /// sqrt-weighted derivative values; for pca the centered projection
  /// scores.
  std::vector<double> feature_vector(const Curve& c) const {
    if (kind_ == Kind::deriv_l2) {
      const std::vector<double> vals =
          (order_ == 0) ? c.values() : estimate_derivative(c, order_).values();
      std::vector<double> w = quadrature_weights(c.grid());
      std::vector<double> f(vals.size());
      for (std::size_t j = 0; j < vals.size(); ++j) {
        f[j] = std::sqrt(w[j]) * vals[j];
      }
      return f;
    }
    require_fitted();
    if (!same_grid(c.grid_ptr(), grid_)) {
      throw GridMismatch("curve grid differs from the grid the pca spec was fitted on");
    }
    const std::size_t m = c.size();
    std::vector<double> scores(static_cast<std::size_t>(q_), 0.0);
    for (int k = 0; k < q_; ++k) {
      const double* row = score_weights_.data() + static_cast<std::size_t>(k) * m;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += row[j] * (c[j] - mean_[j]);
      scores[static_cast<std::size_t>(k)] = s;
    }
    return scores;
  }

  double distance(const Curve& a, const Curve& b) const {
    if (!same_grid(a.grid_ptr(), b.grid_ptr())) {
      throw GridMismatch("curves live on different grids");
    }
    const std::vector<double> fa = feature_vector(a);
    const std::vector<double> fb = feature_vector(b);
    double s = 0.0;
    for (std::size_t j = 0; j < fa.size(); ++j) {
      const double d = fa[j] - fb[j];
      s += d * d;
    }
    return std::sqrt(s);
  }

 private:
  SemiMetricSpec() = default;

  void require_fitted() const {
    if (!fitted()) throw SpecNotFitted("pca semi-metric used before fitting");
  }

  Kind kind_ = Kind::deriv_l2;
  int order_ = 0;
  int q_ = 0;
  // Fitted PCA state.
  GridPtr grid_;
  std::vector<double> mean_;           // m
  std::vector<double> basis_;          // q x m rows, W-orthonormal eigenvectors
  std::vector<double> score_weights_;  // q x m rows, w_j * basis_kj
  std::vector<double> eigenvalues_;    // q, nonincreasing

  friend SemiMetricSpec fit_pca_semimetric(const FunctionalDataset& ds, int q);
};

inline double semimetric_distance(const SemiMetricSpec& spec, const Curve& a,
                                  const Curve& b) {
  return spec.distance(a, b);
}

/// Fits the PCA semi-metric: centers the curves, forms the
/// quadrature-weighted sample covariance and keeps the top-q eigenvectors,
/// orthonormal under the quadrature inner product. Eigenvector signs are
/// normalized so the first nonzero coordinate is positive, which makes the
/// fit reproducible under reordering of the input.
inline SemiMetricSpec fit_pca_semimetric(const FunctionalDataset& ds, int q) {
  const std::size_t n = ds.size();
  const std::size_t m = ds.grid().size();
  if (n < 2) throw InvalidArgument("pca fit needs at least 2 curves");
  if (q < 1 || static_cast<std::size_t>(q) > std::min(n, m)) {
    throw InvalidComponents("pca components must satisfy 1 <= q <= min(n, m)");
  }

  std::vector<double> w = quadrature_weights(ds.grid());
  std::vector<double> sqw(m);
  for (std::size_t j = 0; j < m; ++j) sqw[j] = std::sqrt(w[j]);

  std::vector<double> mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& v = ds.curve(i).values();
    for (std::size_t j = 0; j < m; ++j) mean[j] += v[j];
  }
  for (std::size_t j = 0; j < m; ++j) mean[j] /= static_cast<double>(n);

  // B = W^{1/2} C W^{1/2} with C the covariance of the curve values;
  // eigenvectors v of B map to W-orthonormal eigenfunctions W^{-1/2} v.
  Eigen::MatrixXd a(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& v = ds.curve(i).values();
    for (std::size_t j = 0; j < m; ++j) a(i, j) = sqw[j] * (v[j] - mean[j]);
  }
  Eigen::MatrixXd b = (a.transpose() * a) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success) {
    throw Error("pca eigendecomposition failed");
  }

  SemiMetricSpec spec = SemiMetricSpec::pca(q);
  spec.grid_ = ds.grid_ptr();
  spec.mean_ = std::move(mean);
  spec.basis_.resize(static_cast<std::size_t>(q) * m);
  spec.score_weights_.resize(static_cast<std::size_t>(q) * m);
  spec.eigenvalues_.resize(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k) {
    const Eigen::Index col = static_cast<Eigen::Index>(m) - 1 - k;  // largest first
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    double scale = 0.0;
    for (std::size_t j = 0; j < m; ++j) scale = std::max(scale, std::fabs(v[j]));
    for (std::size_t j = 0; j < m; ++j) {
      if (std::fabs(v[j]) > 1e-12 * scale) {
        if (v[j] < 0.0) v = -v;
        break;
      }
    }
    spec.eigenvalues_[static_cast<std::size_t>(k)] =
        std::max(0.0, eig.eigenvalues()[col]);
    double* basis_row = spec.basis_.data() + static_cast<std::size_t>(k) * m;
    double* sw_row = spec.score_weights_.data() + static_cast<std::size_t>(k) * m;
    for (std::size_t j = 0; j < m; ++j) {
      basis_row[j] = v[j] / sqw[j];
      sw_row[j] = sqw[j] * v[j];  // w_j * basis = sqrt(w_j) * v
    }
  }
  return spec;
}

}  // namespace fel
