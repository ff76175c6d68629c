// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include <fel/errors.hpp>

namespace fel {

/// Common abscissae for a set of discretized curves. Strictly increasing,
/// finite, at least two points.
class Grid {
 public:
  explicit Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw GridTooShort("grid needs at least 2 points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i])) {
        throw InvalidArgument("grid points must be finite");
      }
      if (i > 0 && points_[i] <= points_[i - 1]) {
        throw InvalidArgument("grid points must be strictly increasing");
      }
    }
  }

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }
  double span() const { return points_.back() - points_.front(); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_;
  }

 private:
  std::vector<double> points_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Uniform grid with `count` points spanning [a, b].
inline GridPtr uniform_grid(double a, double b, std::size_t count) {
  if (count < 2 || !(a < b)) {
    throw InvalidArgument("uniform_grid requires count >= 2 and a < b");
  }
  std::vector<double> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    pts[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  pts.back() = b;
  return std::make_shared<const Grid>(std::move(pts));
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

/// A real-valued function observed on a fixed grid.
class Curve {
 public:
  Curve(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgument("curve requires a grid");
    if (values_.size() != grid_->size()) {
      throw InvalidArgument("curve values must match grid length");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("curve values must be finite");
    }
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Composite trapezoid-rule weights; the weights sum to the grid span.
inline std::vector<double> quadrature_weights(const Grid& g) {
  const std::size_t m = g.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double half = 0.5 * (g[i + 1] - g[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

namespace detail {

// Derivative of the quadratic through (t0,f0),(t1,f1),(t2,f2), evaluated at t.
inline double three_point_derivative(double t0, double t1, double t2, double f0,
                                     double f1, double f2, double t) {
  return f0 * (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2)) +
         f1 * (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2)) +
         f2 * (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
}

inline std::vector<double> differentiate_once(const Grid& g,
                                              const std::vector<double>& f) {
  const std::size_t m = g.size();
  std::vector<double> d(m);
  d[0] = three_point_derivative(g[0], g[1], g[2], f[0], f[1], f[2], g[0]);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    d[i] = three_point_derivative(g[i - 1], g[i], g[i + 1], f[i - 1], f[i],
                                  f[i + 1], g[i]);
  }
  d[m - 1] = three_point_derivative(g[m - 3], g[m - 2], g[m - 1], f[m - 3],
                                    f[m - 2], f[m - 1], g[m - 1]);
  return d;
}

}  // namespace detail

/// Numerical derivative of the given order, by repeated second-order
/// differencing: central stencils at interior points, one-sided
/// second-order stencils at the endpoints. Exact for polynomials of
/// degree <= 2 at every application.
inline Curve estimate_derivative(const Curve& c, int order) {
  if (order < 1) throw InvalidArgument("derivative order must be >= 1");
  const std::size_t m = c.size();
  if (m < static_cast<std::size_t>(order) + 2) {
    throw GridTooShort("grid too short for requested derivative order");
  }
  std::vector<double> vals = c.values();
  for (int k = 0; k < order; ++k) {
    vals = detail::differentiate_once(c.grid(), vals);
  }
  return Curve(c.grid_ptr(), std::move(vals));
}

/// Paired functional covariates and scalar responses, with an optional
/// matrix of scalar covariates for the partially linear model. Immutable
/// after construction.
class FunctionalDataset {
 public:
  FunctionalDataset(std::vector<Curve> curves, std::vector<double> responses)
      : FunctionalDataset(std::move(curves), std::move(responses), {}, 0) {}

  FunctionalDataset(std::vector<Curve> curves, std::vector<double> responses,
                    std::vector<double> covariates_row_major, std::size_t p)
      : curves_(std::move(curves)),
        responses_(std::move(responses)),
        z_(std::move(covariates_row_major)),
        p_(p) {
    if (curves_.empty()) throw InvalidArgument("dataset needs at least 1 sample");
    if (responses_.size() != curves_.size()) {
      throw InvalidArgument("responses must match the number of curves");
    }
    grid_ = curves_.front().grid_ptr();
    for (const Curve& c : curves_) {
      if (!same_grid(c.grid_ptr(), grid_)) {
        throw GridMismatch("all curves in a dataset must share one grid");
      }
    }
    for (double y : responses_) {
      if (!std::isfinite(y)) throw InvalidArgument("responses must be finite");
    }
    if (z_.size() != p_ * curves_.size()) {
      throw InvalidArgument("covariate matrix must be n x p");
    }
    for (double z : z_) {
      if (!std::isfinite(z)) throw InvalidArgument("covariates must be finite");
    }
  }

  std::size_t size() const { return curves_.size(); }
  const std::vector<Curve>& curves() const { return curves_; }
  const Curve& curve(std::size_t i) const { return curves_[i]; }
  const std::vector<double>& responses() const { return responses_; }
  double response(std::size_t i) const { return responses_[i]; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }

  std::size_t covariate_dim() const { return p_; }
  bool has_covariates() const { return p_ > 0; }
  double covariate(std::size_t i, std::size_t j) const { return z_[i * p_ + j]; }
  const std::vector<double>& covariates_flat() const { return z_; }

  /// Same curves and covariates with replaced responses.
  FunctionalDataset with_responses(std::vector<double> responses) const {
    return FunctionalDataset(curves_, std::move(responses), z_, p_);
  }

 private:
  std::vector<Curve> curves_;
  std::vector<double> responses_;
  std::vector<double> z_;
  std::size_t p_;
  GridPtr grid_;
};

}  // namespace fel
