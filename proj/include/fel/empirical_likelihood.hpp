// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <fel/errors.hpp>
#include <fel/roots.hpp>

namespace fel {

/// One empirical-likelihood instance: estimating-function values w_i
/// (typically K_i (Y_i - mu)) and the total sample count n entering the
/// n p_i normalization. Samples omitted from `scores` count as zero scores;
/// they are inert in both the multiplier equation and the log ratio.
struct ELProblem {
  std::vector<double> scores;
  std::size_t n = 0;
};

struct ELEvaluation {
  /// -2 log likelihood ratio; +infinity when 0 lies outside the convex
  /// hull of the scores (the likelihood is 0 there).
  double lr = 0.0;
  double lambda = 0.0;
  bool converged = false;
  /// Set when 0 is outside the convex hull of the scores.
  bool boundary = false;
};

/// Solves the Lagrange-multiplier equation
///   g(lambda) = sum_i w_i / (1 + lambda w_i) = 0
/// on the open interval where every 1 + lambda w_i stays positive. g is
/// strictly decreasing there and diverges at the ends, so the root is
/// unique and safely bracketed; Brent's method locates it. Returns the
/// evaluated -2 log ratio 2 sum_i log(1 + lambda w_i) alongside lambda.
///
/// Degenerate cases: all scores zero yields lr = 0 with lambda = 0; scores
/// all on one side of zero (hull violation) yields the boundary flag and
/// lr = +infinity.
inline ELEvaluation solve_lambda(const ELProblem& problem, double tol = 1e-12) {
  if (problem.scores.size() > problem.n) {
    throw InvalidArgument("EL problem has more scores than samples");
  }
  double wmin = std::numeric_limits<double>::infinity();
  double wmax = -std::numeric_limits<double>::infinity();
  bool any_nonzero = false;
  for (double w : problem.scores) {
    if (!std::isfinite(w)) throw InvalidArgument("EL scores must be finite");
    wmin = std::min(wmin, w);
    wmax = std::max(wmax, w);
    if (w != 0.0) any_nonzero = true;
  }
  ELEvaluation eval;
  if (!any_nonzero) {
    eval.converged = true;
    return eval;  // lr = 0, lambda = 0
  }
  if (wmin >= 0.0 || wmax <= 0.0) {
    eval.lr = std::numeric_limits<double>::infinity();
    eval.boundary = true;
    return eval;
  }

  const auto g = [&problem](double lambda) {
    double s = 0.0;
    for (double w : problem.scores) s += w / (1.0 + lambda * w);
    return s;
  };

  // Admissible open interval keeping all 1 + lambda w_i > 0, pulled in by
  // a small edge offset.
  double delta = 1e-10;
  double lo = (-1.0 + delta) / wmax;
  double hi = (-1.0 + delta) / wmin;
  double glo = g(lo);
  double ghi = g(hi);
  // g must straddle zero; tighten toward the singular edges if the offset
  // was too coarse for extreme score ratios.
  for (int tries = 0; tries < 6 && (glo <= 0.0 || ghi >= 0.0); ++tries) {
    delta *= 1e-3;
    lo = (-1.0 + delta) / wmax;
    hi = (-1.0 + delta) / wmin;
    glo = g(lo);
    ghi = g(hi);
  }

  double lambda = 0.0;
  if (glo <= 0.0) {
    lambda = lo;
  } else if (ghi >= 0.0) {
    lambda = hi;
  } else {
    lambda = brent_root(g, lo, hi, glo, ghi);
  }

  eval.lambda = lambda;
  eval.converged = std::fabs(g(lambda)) <= tol;
  double lr = 0.0;
  for (double w : problem.scores) lr += std::log1p(lambda * w);
  eval.lr = std::max(0.0, 2.0 * lr);
  return eval;
}

/// -2 log empirical likelihood ratio for the weighted-mean constraint
/// sum_i p_i K_i (Y_i - mu) = 0. Zero-weight samples contribute zero
/// scores and leave the ratio unchanged.
inline ELEvaluation el_log_ratio(std::span<const double> weights,
                                 std::span<const double> responses, double mu) {
  if (weights.size() != responses.size()) {
    throw InvalidArgument("weights and responses must have equal length");
  }
  if (!std::isfinite(mu)) throw InvalidArgument("mu must be finite");
  ELProblem problem;
  problem.n = weights.size();
  problem.scores.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    problem.scores[i] = weights[i] * (responses[i] - mu);
  }
  return solve_lambda(problem);
}

namespace detail {

/// Euclidean ratio with the conventions the interval search needs: an
/// infeasible constraint (all scores equal and nonzero) reads as +infinity,
/// and the all-zero case reads as 0.
inline double euclidean_ratio_extended(std::span<const double> scores) {
  double sum = 0.0;
  for (double w : scores) sum += w;
  const double wbar = sum / static_cast<double>(scores.size());
  double den = 0.0;
  for (double w : scores) den += (w - wbar) * (w - wbar);
  if (den == 0.0) {
    return (sum == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return sum * sum / den;
}

}  // namespace detail

/// Euclidean log likelihood ratio sum_i (n p_i - 1)^2 in its closed form
///   (sum_i K_i (Y_i - mu))^2 / sum_i (w_i - wbar)^2,
/// where w_i = K_i (Y_i - mu) and wbar is their mean.
inline double euclidean_log_ratio(std::span<const double> weights,
                                  std::span<const double> responses, double mu) {
  if (weights.size() != responses.size()) {
    throw InvalidArgument("weights and responses must have equal length");
  }
  if (weights.empty()) throw InvalidArgument("euclidean ratio of empty sample");
  if (!std::isfinite(mu)) throw InvalidArgument("mu must be finite");
  std::vector<double> scores(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    scores[i] = weights[i] * (responses[i] - mu);
  }
  double sum = 0.0;
  for (double w : scores) sum += w;
  const double wbar = sum / static_cast<double>(scores.size());
  double den = 0.0;
  for (double w : scores) den += (w - wbar) * (w - wbar);
  if (den == 0.0) {
    throw DegenerateScores("all centered scores are equal");
  }
  return sum * sum / den;
}

}  // namespace fel
