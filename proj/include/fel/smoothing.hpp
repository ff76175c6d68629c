// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include <fel/errors.hpp>
#include <fel/grid.hpp>
#include <fel/kernel.hpp>
#include <fel/semimetric.hpp>
#include <fel/stats.hpp>

namespace fel {

struct FixedBandwidth {
  double value;
};

struct CvBandwidth {
  std::vector<double> candidates;
};

using BandwidthRule = std::variant<FixedBandwidth, CvBandwidth>;

struct SmootherConfig {
  KernelKind kernel = KernelKind::quadratic;
  SemiMetricSpec semimetric = SemiMetricSpec::deriv_l2(1);
  BandwidthRule bandwidth = FixedBandwidth{1.0};
  /// When true, the training fits r-hat(X_i) used by the bias correction
  /// and the residual variance leave sample i out; the default keeps the
  /// sample in, matching the plain definition of the estimator.
  bool loo_train_fits = false;
};

/// Kernel weights K_i = K(d(X_i, x0)/h) at one query point.
struct WeightProfile {
  std::vector<double> raw_weights;
  std::size_t effective_count = 0;  // number of strictly positive weights
  double min_distance = std::numeric_limits<double>::infinity();
};

namespace detail {

struct FeatureMatrix {
  std::vector<double> data;  // n x dim, row-major
  std::size_t dim = 0;

  const double* row(std::size_t i) const { return data.data() + i * dim; }
};

inline FeatureMatrix feature_matrix(const SemiMetricSpec& spec,
                                    const std::vector<Curve>& curves) {
  FeatureMatrix f;
  if (curves.empty()) return f;
  std::vector<double> first = spec.feature_vector(curves.front());
  f.dim = first.size();
  f.data.reserve(curves.size() * f.dim);
  f.data.insert(f.data.end(), first.begin(), first.end());
  for (std::size_t i = 1; i < curves.size(); ++i) {
    std::vector<double> fi = spec.feature_vector(curves[i]);
    f.data.insert(f.data.end(), fi.begin(), fi.end());
  }
  return f;
}

inline double feature_distance(const double* a, const double* b,
                               std::size_t dim) {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s);
}

inline WeightProfile profile_from_distances(const std::vector<double>& dist,
                                            KernelKind kernel, double h) {
  WeightProfile p;
  p.raw_weights.resize(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    p.min_distance = std::min(p.min_distance, dist[i]);
    const double k = kernel_eval(kernel, dist[i] / h);
    p.raw_weights[i] = k;
    if (k > 0.0) ++p.effective_count;
  }
  return p;
}

inline void require_fitted_semimetric(const SmootherConfig& cfg) {
  if (!cfg.semimetric.fitted()) {
    throw SpecNotFitted("smoother config holds an unfitted semi-metric");
  }
}

}  // namespace detail

/// Candidate bandwidths: `count` empirical quantiles of the pooled positive
/// pairwise distances, at probabilities placed midpoint-style between 0.05
/// and 0.5 (count = 1 gives the 27.5% quantile). Quantiles use linear
/// interpolation of order statistics.
inline std::vector<double> default_h_grid(const FunctionalDataset& ds,
                                          const SemiMetricSpec& spec,
                                          int count) {
  if (count < 1) throw InvalidArgument("h grid needs count >= 1");
  if (ds.size() < 2) throw InvalidArgument("h grid needs at least 2 samples");
  const detail::FeatureMatrix f = detail::feature_matrix(spec, ds.curves());
  std::vector<double> dists;
  dists.reserve(ds.size() * (ds.size() - 1) / 2);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      const double d = detail::feature_distance(f.row(i), f.row(j), f.dim);
      if (d > 0.0) dists.push_back(d);
    }
  }
  if (dists.empty()) {
    throw DegenerateDistances("all pairwise distances are zero");
  }
  std::sort(dists.begin(), dists.end());
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double p = 0.05 + (static_cast<double>(k) + 0.5) * 0.45 /
                                static_cast<double>(count);
    const double pos = p * static_cast<double>(dists.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, dists.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    grid[static_cast<std::size_t>(k)] =
        dists[lo] + frac * (dists[hi] - dists[lo]);
  }
  return grid;
}

/// Leave-one-out cross-validation over the candidate grid. Samples whose
/// leave-one-out neighborhood is empty at a candidate contribute the sample
/// variance of Y instead of a squared error, so overly small candidates are
/// penalized rather than crashing. Ties are broken toward the larger h.
inline double cv_bandwidth(const FunctionalDataset& ds,
                           const SmootherConfig& cfg) {
  detail::require_fitted_semimetric(cfg);
  const auto* cv = std::get_if<CvBandwidth>(&cfg.bandwidth);
  if (cv == nullptr) {
    throw InvalidArgument("cv_bandwidth requires a cv bandwidth rule");
  }
  if (cv->candidates.empty()) throw InvalidArgument("cv candidate grid is empty");
  for (double h : cv->candidates) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw InvalidArgument("cv candidates must be positive and finite");
    }
  }
  const std::size_t n = ds.size();
  if (n < 3) throw InvalidArgument("cv needs at least 3 samples");

  const detail::FeatureMatrix f = detail::feature_matrix(cfg.semimetric, ds.curves());
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = detail::feature_distance(f.row(i), f.row(j), f.dim);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }
  const double penalty = sample_variance(ds.responses());

  std::vector<double> candidates = cv->candidates;
  std::sort(candidates.begin(), candidates.end());
  double best_h = candidates.front();
  double best_crit = std::numeric_limits<double>::infinity();
  for (double h : candidates) {
    double crit = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = 0.0, sky = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double k = kernel_eval(cfg.kernel, dist[i * n + j] / h);
        sk += k;
        sky += k * ds.response(j);
      }
      if (sk > 0.0) {
        const double e = ds.response(i) - sky / sk;
        crit += e * e;
      } else {
        crit += penalty;
      }
    }
    if (crit <= best_crit) {
      best_crit = crit;
      best_h = h;
    }
  }
  return best_h;
}

namespace detail {

inline double resolve_bandwidth(const FunctionalDataset& ds,
                                const SmootherConfig& cfg) {
  if (const auto* fixed = std::get_if<FixedBandwidth>(&cfg.bandwidth)) {
    if (!(fixed->value > 0.0) || !std::isfinite(fixed->value)) {
      throw InvalidArgument("bandwidth must be positive and finite");
    }
    return fixed->value;
  }
  return cv_bandwidth(ds, cfg);
}

}  // namespace detail

/// Kernel weights of every training curve at x0. A cv bandwidth rule is
/// resolved on the fly; pass a fixed bandwidth to avoid that cost.
inline WeightProfile weight_profile(const FunctionalDataset& ds, const Curve& x0,
                                    const SmootherConfig& cfg) {
  detail::require_fitted_semimetric(cfg);
  if (!same_grid(x0.grid_ptr(), ds.grid_ptr())) {
    throw GridMismatch("query curve grid differs from the dataset grid");
  }
  const double h = detail::resolve_bandwidth(ds, cfg);
  const detail::FeatureMatrix f = detail::feature_matrix(cfg.semimetric, ds.curves());
  const std::vector<double> fx = cfg.semimetric.feature_vector(x0);
  std::vector<double> dist(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    dist[i] = detail::feature_distance(f.row(i), fx.data(), f.dim);
  }
  return detail::profile_from_distances(dist, cfg.kernel, h);
}

namespace detail {

inline double nw_from_profile(const WeightProfile& prof,
                              const std::vector<double>& responses) {
  double sk = 0.0, sky = 0.0;
  for (std::size_t i = 0; i < prof.raw_weights.size(); ++i) {
    sk += prof.raw_weights[i];
    sky += prof.raw_weights[i] * responses[i];
  }
  if (!(sk > 0.0)) {
    throw EmptyNeighborhood("no training curve within bandwidth of the query",
                            prof.min_distance);
  }
  return sky / sk;
}

}  // namespace detail

/// Functional Nadaraya-Watson estimate at x0: the kernel-weighted mean of
/// the responses, equivalently the root of sum K_i (Y_i - mu) = 0.
inline double nw_estimate(const FunctionalDataset& ds, const Curve& x0,
                          const SmootherConfig& cfg) {
  if (ds.size() < 2) throw InvalidArgument("estimation needs at least 2 samples");
  const WeightProfile prof = weight_profile(ds, x0, cfg);
  return detail::nw_from_profile(prof, ds.responses());
}

/// Precomputed smoothing state for one dataset and one resolved bandwidth:
/// feature embeddings, in-sample fits r-hat(X_i) and the residual variance
/// estimate. Immutable after construction; safe for concurrent use.
class Smoother {
 public:
  Smoother(FunctionalDataset ds, SmootherConfig cfg)
      : ds_(std::move(ds)), cfg_(std::move(cfg)) {
    if (ds_.size() < 2) throw InvalidArgument("estimation needs at least 2 samples");
    detail::require_fitted_semimetric(cfg_);
    h_ = detail::resolve_bandwidth(ds_, cfg_);
    cfg_.bandwidth = FixedBandwidth{h_};
    features_ = detail::feature_matrix(cfg_.semimetric, ds_.curves());

    const std::size_t n = ds_.size();
    train_fits_.assign(n, std::numeric_limits<double>::quiet_NaN());
    double rss = 0.0;
    sigma2_count_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = 0.0, sky = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (cfg_.loo_train_fits && j == i) continue;
        const double d = detail::feature_distance(features_.row(i),
                                                  features_.row(j), features_.dim);
        const double k = kernel_eval(cfg_.kernel, d / h_);
        sk += k;
        sky += k * ds_.response(j);
      }
      if (sk > 0.0) {
        train_fits_[i] = sky / sk;
        const double e = ds_.response(i) - train_fits_[i];
        rss += e * e;
        ++sigma2_count_;
      }
    }
    sigma2_ = (sigma2_count_ > 0) ? rss / static_cast<double>(sigma2_count_)
                                  : std::numeric_limits<double>::quiet_NaN();
  }

  const FunctionalDataset& data() const { return ds_; }
  const SmootherConfig& config() const { return cfg_; }
  double bandwidth() const { return h_; }

  WeightProfile profile(const Curve& x0) const {
    if (!same_grid(x0.grid_ptr(), ds_.grid_ptr())) {
      throw GridMismatch("query curve grid differs from the dataset grid");
    }
    const std::vector<double> fx = cfg_.semimetric.feature_vector(x0);
    std::vector<double> dist(ds_.size());
    for (std::size_t i = 0; i < ds_.size(); ++i) {
      dist[i] = detail::feature_distance(features_.row(i), fx.data(), features_.dim);
    }
    return detail::profile_from_distances(dist, cfg_.kernel, h_);
  }

  double nw(const WeightProfile& prof) const {
    return detail::nw_from_profile(prof, ds_.responses());
  }

  double nw(const Curve& x0) const { return nw(profile(x0)); }

  /// In-sample fits r-hat(X_i); NaN where the (leave-one-out) neighborhood
  /// is empty. With the default self-inclusive convention every entry is
  /// defined.
  const std::vector<double>& train_fits() const { return train_fits_; }

  /// Mean squared residual over the samples with defined fits.
  double sigma2() const {
    if (sigma2_count_ == 0) {
      throw EmptyNeighborhood("no sample has a usable in-sample fit",
                              std::numeric_limits<double>::infinity());
    }
    return sigma2_;
  }

  std::size_t sigma2_count() const { return sigma2_count_; }

 private:
  FunctionalDataset ds_;
  SmootherConfig cfg_;
  double h_ = 0.0;
  detail::FeatureMatrix features_;
  std::vector<double> train_fits_;
  double sigma2_ = 0.0;
  std::size_t sigma2_count_ = 0;
};

}  // namespace fel
