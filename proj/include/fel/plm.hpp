// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <fel/errors.hpp>
#include <fel/grid.hpp>
#include <fel/intervals.hpp>
#include <fel/smoothing.hpp>

namespace fel {

/// Profile least-squares fit of the semi-functional partially linear model
/// Y = Z' beta + r(X) + eps.
struct PLMFit {
  std::vector<double> beta;
  SmootherConfig config;  // bandwidth resolved to the value actually used
  std::vector<double> partial_responses;  // Y_i - Z_i' beta
};

/// Since r-hat(x, beta) is linear in beta, the profile minimizer has the
/// closed form beta = (Zt'Zt)^{-1} Zt'Yt with Zt = (I-S)Z, Yt = (I-S)Y and
/// S the row-normalized kernel smoother matrix. Solved by column-pivoted
/// QR. The smoother matrix reuses the config's kernel, semi-metric and
/// bandwidth unless a separate profiling bandwidth is given.
inline PLMFit profile_beta(const FunctionalDataset& ds, const SmootherConfig& cfg,
                           std::optional<double> profiling_bandwidth = {}) {
  const std::size_t n = ds.size();
  const std::size_t p = ds.covariate_dim();
  if (p == 0) throw InvalidArgument("profile_beta requires at least one covariate");
  if (n < p + 1) throw InvalidArgument("profile_beta needs n > p samples");
  detail::require_fitted_semimetric(cfg);

  const double h = detail::resolve_bandwidth(ds, cfg);
  const double hs = profiling_bandwidth.value_or(h);
  if (!(hs > 0.0) || !std::isfinite(hs)) {
    throw InvalidArgument("profiling bandwidth must be positive and finite");
  }

  const detail::FeatureMatrix f = detail::feature_matrix(cfg.semimetric, ds.curves());

  // Zt = (I - S) Z and Yt = (I - S) Y, built row by row without storing S.
  Eigen::MatrixXd zt(n, p);
  Eigen::VectorXd yt(n);
  std::vector<double> srow(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sk = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d =
          detail::feature_distance(f.row(i), f.row(j), f.dim);
      srow[j] = kernel_eval(cfg.kernel, d / hs);
      sk += srow[j];
    }
    if (!(sk > 0.0)) {
      throw EmptyNeighborhood("smoother matrix row has no support", 0.0,
                              static_cast<std::ptrdiff_t>(i));
    }
    double sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) sy += srow[j] * ds.response(j);
    yt(static_cast<Eigen::Index>(i)) = ds.response(i) - sy / sk;
    for (std::size_t c = 0; c < p; ++c) {
      double sz = 0.0;
      for (std::size_t j = 0; j < n; ++j) sz += srow[j] * ds.covariate(j, c);
      zt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          ds.covariate(i, c) - sz / sk;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zt);
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    throw SingularDesign("profiled design matrix is rank deficient");
  }
  const Eigen::VectorXd beta = qr.solve(yt);

  PLMFit fit;
  fit.beta.assign(beta.data(), beta.data() + p);
  fit.config = cfg;
  fit.config.bandwidth = FixedBandwidth{h};
  fit.partial_responses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double zb = 0.0;
    for (std::size_t c = 0; c < p; ++c) zb += ds.covariate(i, c) * fit.beta[c];
    fit.partial_responses[i] = ds.response(i) - zb;
  }
  return fit;
}

struct PLMOptions {
  /// Use this coefficient vector instead of the profile estimate.
  std::optional<std::vector<double>> beta_override;
  /// Covariates z of the query; when present the interval is shifted by
  /// z' beta so it targets z' beta + r(x0).
  std::optional<std::vector<double>> query_covariates;
  /// Separate bandwidth for the profiling smoother matrix.
  std::optional<double> profiling_bandwidth;
};

/// Confidence interval for r(x0) in the partially linear model: the chosen
/// interval machinery applied to the partial responses Y_i - Z_i' beta.
inline IntervalResult plm_interval(const FunctionalDataset& ds, const Curve& x0,
                                   const SmootherConfig& cfg, double alpha,
                                   Method method, const PLMOptions& options = {}) {
  const std::size_t p = ds.covariate_dim();
  SmootherConfig resolved = cfg;
  resolved.bandwidth = FixedBandwidth{detail::resolve_bandwidth(ds, cfg)};

  std::vector<double> beta;
  if (options.beta_override) {
    if (options.beta_override->size() != p) {
      throw InvalidArgument("beta override must have length p");
    }
    beta = *options.beta_override;
  } else if (p > 0) {
    beta = profile_beta(ds, resolved, options.profiling_bandwidth).beta;
  }

  std::vector<double> partial = ds.responses();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double zb = 0.0;
    for (std::size_t c = 0; c < p; ++c) zb += ds.covariate(i, c) * beta[c];
    partial[i] -= zb;
  }

  const Smoother sm(ds.with_responses(std::move(partial)), resolved);
  IntervalResult res = make_interval(sm, x0, alpha, method);

  if (options.query_covariates) {
    if (options.query_covariates->size() != beta.size()) {
      throw InvalidArgument("query covariates must match the coefficient length");
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < beta.size(); ++c) {
      shift += (*options.query_covariates)[c] * beta[c];
    }
    res.estimate += shift;
    res.lo += shift;
    res.hi += shift;
  }
  return res;
}

inline IntervalResult plm_el_interval(const FunctionalDataset& ds, const Curve& x0,
                                      const SmootherConfig& cfg, double alpha,
                                      bool corrected,
                                      const PLMOptions& options = {}) {
  return plm_interval(ds, x0, cfg, alpha,
                      corrected ? Method::el_corrected : Method::el, options);
}

}  // namespace fel
