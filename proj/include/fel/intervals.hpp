// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <fel/empirical_likelihood.hpp>
#include <fel/errors.hpp>
#include <fel/grid.hpp>
#include <fel/roots.hpp>
#include <fel/smoothing.hpp>
#include <fel/stats.hpp>

namespace fel {

enum class Method { el, el_corrected, euclidean, normal, normal_corrected };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::el: return "el";
    case Method::el_corrected: return "el_corrected";
    case Method::euclidean: return "euclidean";
    case Method::normal: return "normal";
    case Method::normal_corrected: return "normal_corrected";
  }
  return "?";
}

inline Method parse_method(const std::string& name) {
  if (name == "el") return Method::el;
  if (name == "el_corrected") return Method::el_corrected;
  if (name == "euclidean") return Method::euclidean;
  if (name == "normal") return Method::normal;
  if (name == "normal_corrected") return Method::normal_corrected;
  throw InvalidArgument("unknown method: " + name);
}

enum class ELVariant { plain, corrected, euclidean };

struct IntervalDiagnostics {
  std::size_t effective_count = 0;
  double lambda_lo = 0.0;  // Lagrange multiplier at the endpoints (EL variants)
  double lambda_hi = 0.0;
  double bandwidth = 0.0;
  double se = 0.0;  // normal-approximation standard error at the query
};

struct IntervalResult {
  Method method = Method::el;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;  // 1 - alpha
  IntervalDiagnostics diagnostics;
};

/// Plug-in variance of the Nadaraya-Watson estimate at one query point:
/// se^2 = sigma2_hat * sum K_i^2 / (sum K_i)^2.
struct VarianceEstimate {
  double sigma2_hat = 0.0;
  double kernel_factor = 0.0;
  double se = 0.0;
};

inline VarianceEstimate variance_estimate(const Smoother& sm,
                                          const WeightProfile& prof) {
  double sk = 0.0, sk2 = 0.0;
  for (double k : prof.raw_weights) {
    sk += k;
    sk2 += k * k;
  }
  if (!(sk > 0.0)) {
    throw EmptyNeighborhood("no training curve within bandwidth of the query",
                            prof.min_distance);
  }
  VarianceEstimate v;
  v.sigma2_hat = sm.sigma2();
  v.kernel_factor = sk2 / (sk * sk);
  v.se = std::sqrt(v.sigma2_hat * v.kernel_factor);
  return v;
}

/// Mean squared in-sample residual; samples without a usable fit are
/// skipped (possible only in leave-one-out mode).
inline double residual_variance(const FunctionalDataset& ds,
                                const SmootherConfig& cfg) {
  return Smoother(ds, cfg).sigma2();
}

namespace detail {

/// Per-sample pseudo responses for the bias-corrected estimating equation:
/// c_i = Y_i - r-hat(X_i) + r-hat(x0). Entries with zero kernel weight are
/// passed through untouched since their scores vanish anyway.
inline std::vector<double> corrected_targets(const Smoother& sm,
                                             const WeightProfile& prof) {
  const std::vector<double>& y = sm.data().responses();
  const std::vector<double>& fits = sm.train_fits();
  const double r0 = sm.nw(prof);
  std::vector<double> targets(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (prof.raw_weights[i] > 0.0) {
      if (std::isnan(fits[i])) {
        throw EmptyNeighborhood(
            "bias correction needs r-hat at every weighted training curve",
            prof.min_distance, static_cast<std::ptrdiff_t>(i));
      }
      targets[i] = y[i] - fits[i] + r0;
    } else {
      targets[i] = y[i];
    }
  }
  return targets;
}

inline double weighted_mean(const WeightProfile& prof,
                            const std::vector<double>& values) {
  double sk = 0.0, skv = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sk += prof.raw_weights[i];
    skv += prof.raw_weights[i] * values[i];
  }
  return skv / sk;
}

}  // namespace detail

/// Scores of the bias-corrected estimating equation
/// w_i = K_i (Y_i - r-hat(X_i) + r-hat(x0) - mu).
inline ELProblem bias_corrected_scores(const Smoother& sm, const Curve& x0,
                                       double mu) {
  const WeightProfile prof = sm.profile(x0);
  if (prof.effective_count == 0) {
    throw EmptyNeighborhood("no training curve within bandwidth of the query",
                            prof.min_distance);
  }
  const std::vector<double> targets = detail::corrected_targets(sm, prof);
  ELProblem problem;
  problem.n = targets.size();
  problem.scores.resize(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    problem.scores[i] = prof.raw_weights[i] * (targets[i] - mu);
  }
  return problem;
}

inline ELProblem bias_corrected_scores(const FunctionalDataset& ds,
                                       const Curve& x0,
                                       const SmootherConfig& cfg, double mu) {
  return bias_corrected_scores(Smoother(ds, cfg), x0, mu);
}

/// Root of the bias-corrected estimating equation:
/// mu* = r-hat(x0) + sum K_i (Y_i - r-hat(X_i)) / sum K_i.
inline double corrected_center(const Smoother& sm, const Curve& x0) {
  const WeightProfile prof = sm.profile(x0);
  if (prof.effective_count == 0) {
    throw EmptyNeighborhood("no training curve within bandwidth of the query",
                            prof.min_distance);
  }
  return detail::weighted_mean(prof, detail::corrected_targets(sm, prof));
}

inline double corrected_center(const FunctionalDataset& ds, const Curve& x0,
                               const SmootherConfig& cfg) {
  return corrected_center(Smoother(ds, cfg), x0);
}

namespace detail {

struct LrEval {
  double lr = 0.0;
  double lambda = 0.0;
};

// Confidence sets are {mu : lr(mu) <= threshold}. lr is clamped to a large
// finite value so hull violations (+infinity) stay usable as bracket ends.
constexpr double kLrClamp = 1e12;

template <typename LrFn>
std::pair<double, double> find_endpoint(LrFn&& lr, double center, double step0,
                                        double threshold, int direction) {
  const auto f = [&](double mu) {
    return std::min(lr(mu).lr, kLrClamp) - threshold;
  };
  double prev = center;
  double fprev = f(center);
  if (fprev >= 0.0) {
    // lr already at the threshold at the center; degenerate endpoint.
    return {center, lr(center).lambda};
  }
  double step = step0;
  for (int k = 0; k < 60; ++k) {
    const double trial = center + direction * step;
    const double ftrial = f(trial);
    if (ftrial >= 0.0) {
      const double root = brent_root(f, prev, trial, fprev, ftrial);
      return {root, lr(root).lambda};
    }
    prev = trial;
    fprev = ftrial;
    step *= 2.0;
  }
  throw BracketingFailed("confidence bound never crossed the chi-square threshold");
}

template <typename LrFn>
IntervalResult interval_from_lr(Method method, LrFn&& lr, double center,
                                double step0, double threshold, double alpha,
                                const Smoother& sm, const WeightProfile& prof,
                                const VarianceEstimate& var) {
  IntervalResult res;
  res.method = method;
  res.estimate = center;
  res.level = 1.0 - alpha;
  res.diagnostics.effective_count = prof.effective_count;
  res.diagnostics.bandwidth = sm.bandwidth();
  res.diagnostics.se = var.se;
  auto [lo, lambda_lo] = find_endpoint(lr, center, step0, threshold, -1);
  auto [hi, lambda_hi] = find_endpoint(lr, center, step0, threshold, +1);
  res.lo = lo;
  res.hi = hi;
  res.diagnostics.lambda_lo = lambda_lo;
  res.diagnostics.lambda_hi = lambda_hi;
  return res;
}

}  // namespace detail

/// Empirical-likelihood confidence interval for the regression value at x0:
/// the set {mu : lr(mu) <= chi2_1(1-alpha)}, with lr the plain,
/// bias-corrected or Euclidean -2 log ratio. Endpoints are located by
/// geometric bracket expansion away from the center followed by Brent
/// root-finding. A profile whose scores vanish identically (constant
/// responses on the support) yields the degenerate point interval.
inline IntervalResult el_confidence_interval(const Smoother& sm, const Curve& x0,
                                             double alpha, ELVariant variant) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must be in (0,1)");
  }
  const WeightProfile prof = sm.profile(x0);
  if (prof.effective_count == 0) {
    throw EmptyNeighborhood("no training curve within bandwidth of the query",
                            prof.min_distance);
  }
  const std::vector<double>& weights = prof.raw_weights;
  const std::vector<double> targets =
      (variant == ELVariant::corrected)
          ? detail::corrected_targets(sm, prof)
          : sm.data().responses();
  const double center = detail::weighted_mean(prof, targets);
  const VarianceEstimate var = variance_estimate(sm, prof);

  const Method method = (variant == ELVariant::plain)       ? Method::el
                        : (variant == ELVariant::corrected) ? Method::el_corrected
                                                            : Method::euclidean;

  // Degenerate profile: every score vanishes at the center, so the ratio is
  // 0 there and +infinity everywhere else.
  double max_abs_score = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    max_abs_score =
        std::max(max_abs_score, std::fabs(weights[i] * (targets[i] - center)));
  }
  if (max_abs_score == 0.0) {
    IntervalResult res;
    res.method = method;
    res.estimate = center;
    res.lo = center;
    res.hi = center;
    res.level = 1.0 - alpha;
    res.diagnostics.effective_count = prof.effective_count;
    res.diagnostics.bandwidth = sm.bandwidth();
    res.diagnostics.se = var.se;
    return res;
  }

  const double threshold = chi2_quantile(1.0 - alpha);
  const double step0 =
      (var.se > 0.0) ? var.se : std::max(1e-8, 1e-3 * (1.0 + std::fabs(center)));

  ELProblem problem;
  problem.n = weights.size();
  problem.scores.resize(weights.size());
  if (variant == ELVariant::euclidean) {
    const auto lr = [&](double mu) {
      for (std::size_t i = 0; i < weights.size(); ++i) {
        problem.scores[i] = weights[i] * (targets[i] - mu);
      }
      return detail::LrEval{detail::euclidean_ratio_extended(problem.scores), 0.0};
    };
    return detail::interval_from_lr(method, lr, center, step0, threshold, alpha,
                                    sm, prof, var);
  }
  const auto lr = [&](double mu) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      problem.scores[i] = weights[i] * (targets[i] - mu);
    }
    const ELEvaluation eval = solve_lambda(problem);
    return detail::LrEval{eval.lr, eval.lambda};
  };
  return detail::interval_from_lr(method, lr, center, step0, threshold, alpha,
                                  sm, prof, var);
}

inline IntervalResult el_confidence_interval(const FunctionalDataset& ds,
                                             const Curve& x0,
                                             const SmootherConfig& cfg,
                                             double alpha, ELVariant variant) {
  return el_confidence_interval(Smoother(ds, cfg), x0, alpha, variant);
}

/// Normal-approximation interval: center +/- z_{1-alpha/2} * se with the
/// plug-in variance estimate; optionally centered at the root of the
/// bias-corrected estimating equation.
inline IntervalResult normal_interval(const Smoother& sm, const Curve& x0,
                                      double alpha, bool corrected) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must be in (0,1)");
  }
  const WeightProfile prof = sm.profile(x0);
  if (prof.effective_count == 0) {
    throw EmptyNeighborhood("no training curve within bandwidth of the query",
                            prof.min_distance);
  }
  const VarianceEstimate var = variance_estimate(sm, prof);
  const double center =
      corrected ? detail::weighted_mean(prof, detail::corrected_targets(sm, prof))
                : sm.nw(prof);
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  IntervalResult res;
  res.method = corrected ? Method::normal_corrected : Method::normal;
  res.estimate = center;
  res.lo = center - z * var.se;
  res.hi = center + z * var.se;
  res.level = 1.0 - alpha;
  res.diagnostics.effective_count = prof.effective_count;
  res.diagnostics.bandwidth = sm.bandwidth();
  res.diagnostics.se = var.se;
  return res;
}

inline IntervalResult normal_interval(const FunctionalDataset& ds, const Curve& x0,
                                      const SmootherConfig& cfg, double alpha,
                                      bool corrected) {
  return normal_interval(Smoother(ds, cfg), x0, alpha, corrected);
}

/// Interval by method tag; the el* and euclidean tags route through the
/// empirical-likelihood machinery, the normal tags through the
/// normal-approximation one.
inline IntervalResult make_interval(const Smoother& sm, const Curve& x0,
                                    double alpha, Method method) {
  switch (method) {
    case Method::el:
      return el_confidence_interval(sm, x0, alpha, ELVariant::plain);
    case Method::el_corrected:
      return el_confidence_interval(sm, x0, alpha, ELVariant::corrected);
    case Method::euclidean:
      return el_confidence_interval(sm, x0, alpha, ELVariant::euclidean);
    case Method::normal:
      return normal_interval(sm, x0, alpha, false);
    case Method::normal_corrected:
      return normal_interval(sm, x0, alpha, true);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace fel
