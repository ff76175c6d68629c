// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <fel/grid.hpp>
#include <fel/kernel.hpp>
#include <fel/semimetric.hpp>
#include <fel/smoothing.hpp>
#include <fel/stats.hpp>

#include "oracles.hpp"

namespace {

using fel::Curve;
using fel::CvBandwidth;
using fel::FixedBandwidth;
using fel::FunctionalDataset;
using fel::GridPtr;
using fel::KernelKind;
using fel::SemiMetricSpec;
using fel::SmootherConfig;
using fel::WeightProfile;

// Constant curves on [0,1]: under the order-0 semi-metric the distance of
// two constants is exactly the absolute difference of their levels.
Curve constant_curve(const GridPtr& g, double level) {
  return Curve(g, std::vector<double>(g->size(), level));
}

FunctionalDataset constant_dataset(const GridPtr& g,
                                   const std::vector<double>& levels,
                                   const std::vector<double>& y) {
  std::vector<Curve> curves;
  for (double v : levels) curves.push_back(constant_curve(g, v));
  return FunctionalDataset(std::move(curves), y);
}

SmootherConfig l2_config(double h, KernelKind k = KernelKind::quadratic) {
  SmootherConfig cfg;
  cfg.kernel = k;
  cfg.semimetric = SemiMetricSpec::deriv_l2(0);
  cfg.bandwidth = FixedBandwidth{h};
  return cfg;
}

TEST(Kernel, EvaluationRules) {
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::quadratic, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::quadratic, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::quadratic, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::quadratic, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::uniform, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::uniform, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(fel::kernel_eval(KernelKind::uniform, 1.0001), 0.0);
  EXPECT_THROW(fel::kernel_eval(KernelKind::uniform, -0.1), fel::InvalidArgument);
}

TEST(WeightProfileOp, AllOnesWhenBandwidthDominates) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.3, 0.9}, {1.0, 2.0, 3.0});
  const WeightProfile p = fel::weight_profile(
      ds, constant_curve(g, 0.5), l2_config(10.0, KernelKind::uniform));
  EXPECT_EQ(p.effective_count, 3u);
  for (double w : p.raw_weights) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(WeightProfileOp, EmptyWhenBandwidthTiny) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.3, 0.9}, {1.0, 2.0, 3.0});
  const WeightProfile p = fel::weight_profile(ds, constant_curve(g, 0.5),
                                              l2_config(1e-4));
  EXPECT_EQ(p.effective_count, 0u);
  for (double w : p.raw_weights) EXPECT_DOUBLE_EQ(w, 0.0);
  EXPECT_NEAR(p.min_distance, 0.2, 1e-12);
}

TEST(WeightProfileOp, QuadraticKernelValues) {
  // Distances (0.2, 0.5, 1.4) at h = 1 with the quadratic kernel.
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.2, 0.5, 1.4}, {1.0, 3.0, 100.0});
  const WeightProfile p =
      fel::weight_profile(ds, constant_curve(g, 0.0), l2_config(1.0));
  ASSERT_EQ(p.raw_weights.size(), 3u);
  EXPECT_NEAR(p.raw_weights[0], 0.96, 1e-12);
  EXPECT_NEAR(p.raw_weights[1], 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(p.raw_weights[2], 0.0);
  EXPECT_EQ(p.effective_count, 2u);
}

TEST(NwEstimate, WeightedMeanExample) {
  // (0.96*1 + 0.75*3) / 1.71
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.2, 0.5, 1.4}, {1.0, 3.0, 100.0});
  const double est =
      fel::nw_estimate(ds, constant_curve(g, 0.0), l2_config(1.0));
  EXPECT_NEAR(est, 1.877193, 1e-6);
  EXPECT_NEAR(est, (0.96 * 1.0 + 0.75 * 3.0) / 1.71, 1e-12);
}

TEST(NwEstimate, ConstantResponses) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.1, 0.4, 0.8}, {7.5, 7.5, 7.5});
  EXPECT_DOUBLE_EQ(
      fel::nw_estimate(ds, constant_curve(g, 0.3), l2_config(2.0)), 7.5);
}

TEST(NwEstimate, SingleSupportPoint) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 5.0, 9.0}, {42.0, -1.0, -2.0});
  EXPECT_DOUBLE_EQ(
      fel::nw_estimate(ds, constant_curve(g, 0.1), l2_config(0.5)), 42.0);
}

TEST(NwEstimate, EmptyNeighborhoodCarriesMinDistance) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  try {
    fel::nw_estimate(ds, constant_curve(g, 0.0), l2_config(0.25));
    FAIL() << "expected EmptyNeighborhood";
  } catch (const fel::EmptyNeighborhood& e) {
    EXPECT_NEAR(e.min_distance(), 1.0, 1e-12);
  }
}

TEST(NwEstimate, ConvexCombinationBounds) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> levels, y;
    for (int i = 0; i < 8; ++i) {
      levels.push_back(u(rng));
      y.push_back(10.0 * u(rng) - 5.0);
    }
    const FunctionalDataset ds = constant_dataset(g, levels, y);
    const Curve x0 = constant_curve(g, u(rng));
    const SmootherConfig cfg = l2_config(0.6);
    const WeightProfile p = fel::weight_profile(ds, x0, cfg);
    if (p.effective_count == 0) continue;
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (p.raw_weights[i] > 0.0) {
        lo = std::min(lo, y[i]);
        hi = std::max(hi, y[i]);
      }
    }
    const double est = fel::nw_estimate(ds, x0, cfg);
    EXPECT_GE(est, lo - 1e-12);
    EXPECT_LE(est, hi + 1e-12);
  }
}

TEST(NwEstimate, ShiftAndScaleEquivariance) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const std::vector<double> levels{0.1, 0.25, 0.6, 0.9};
  const std::vector<double> y{1.0, -2.0, 0.5, 3.0};
  const FunctionalDataset ds = constant_dataset(g, levels, y);
  const Curve x0 = constant_curve(g, 0.4);
  const SmootherConfig cfg = l2_config(0.7);
  const double base = fel::nw_estimate(ds, x0, cfg);

  std::vector<double> shifted = y;
  for (double& v : shifted) v += 11.25;
  EXPECT_NEAR(fel::nw_estimate(ds.with_responses(shifted), x0, cfg), base + 11.25,
              1e-12);
  std::vector<double> scaled = y;
  for (double& v : scaled) v *= -3.0;
  EXPECT_NEAR(fel::nw_estimate(ds.with_responses(scaled), x0, cfg), -3.0 * base,
              1e-12);
}

TEST(NwEstimate, WeightScaleInvariance) {
  // The estimate only sees weight ratios, so rescaling a profile is inert.
  WeightProfile p;
  p.raw_weights = {0.3, 0.0, 1.2, 0.7};
  p.effective_count = 3;
  const std::vector<double> y{1.0, 99.0, -4.0, 2.5};
  const double base = fel::detail::nw_from_profile(p, y);
  WeightProfile scaled = p;
  for (double& w : scaled.raw_weights) w *= 37.5;
  EXPECT_NEAR(fel::detail::nw_from_profile(scaled, y), base, 1e-12);
}

TEST(NwEstimate, UniformKernelHugeBandwidthGivesMean) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const std::vector<double> y{1.0, 2.0, 6.0, -1.0};
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.2, 0.4, 0.9}, y);
  const double est = fel::nw_estimate(ds, constant_curve(g, 0.5),
                                      l2_config(1e6, KernelKind::uniform));
  EXPECT_NEAR(est, fel::mean(y), 1e-12);
}

TEST(DefaultHGrid, MatchesQuantileOracle) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> levels, y;
  for (int i = 0; i < 10; ++i) {
    levels.push_back(u(rng));
    y.push_back(u(rng));
  }
  const FunctionalDataset ds = constant_dataset(g, levels, y);
  const SemiMetricSpec spec = SemiMetricSpec::deriv_l2(0);
  const std::vector<double> h1 = fel::default_h_grid(ds, spec, 1);
  ASSERT_EQ(h1.size(), 1u);

  std::vector<double> dists;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = i + 1; j < levels.size(); ++j) {
      const double d = std::fabs(levels[i] - levels[j]);
      if (d > 0.0) dists.push_back(d);
    }
  }
  std::sort(dists.begin(), dists.end());
  EXPECT_NEAR(h1[0], oracles::quantile_type7(dists, 0.275), 1e-12);

  const std::vector<double> h5 = fel::default_h_grid(ds, spec, 5);
  ASSERT_EQ(h5.size(), 5u);
  for (int k = 0; k < 5; ++k) {
    const double p = 0.05 + (k + 0.5) * 0.45 / 5.0;
    EXPECT_NEAR(h5[static_cast<std::size_t>(k)],
                oracles::quantile_type7(dists, p), 1e-12);
    EXPECT_GT(h5[static_cast<std::size_t>(k)], 0.0);
  }
}

TEST(DefaultHGrid, DegenerateDistances) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.4, 0.4, 0.4}, {1.0, 2.0, 3.0});
  EXPECT_THROW(fel::default_h_grid(ds, SemiMetricSpec::deriv_l2(0), 3),
               fel::DegenerateDistances);
}

SmootherConfig cv_config(std::vector<double> candidates,
                         KernelKind k = KernelKind::quadratic) {
  SmootherConfig cfg;
  cfg.kernel = k;
  cfg.semimetric = SemiMetricSpec::deriv_l2(0);
  cfg.bandwidth = CvBandwidth{std::move(candidates)};
  return cfg;
}

TEST(CvBandwidth, SingletonGrid) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.5, 1.0}, {1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(fel::cv_bandwidth(ds, cv_config({0.8})), 0.8);
}

TEST(CvBandwidth, ConstantResponsesTieTowardLargerH) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.3, 0.6, 0.9}, {5.0, 5.0, 5.0, 5.0});
  // Both candidates give every sample full leave-one-out coverage and zero
  // error; the tie goes to the larger one.
  EXPECT_DOUBLE_EQ(fel::cv_bandwidth(ds, cv_config({2.0, 5.0})), 5.0);
  EXPECT_DOUBLE_EQ(fel::cv_bandwidth(ds, cv_config({5.0, 2.0})), 5.0);
}

TEST(CvBandwidth, InvalidConfigurations) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.5, 1.0}, {1.0, 2.0, 3.0});
  EXPECT_THROW(fel::cv_bandwidth(ds, cv_config({})), fel::InvalidArgument);
  EXPECT_THROW(fel::cv_bandwidth(ds, cv_config({-1.0})), fel::InvalidArgument);
  EXPECT_THROW(fel::cv_bandwidth(ds, l2_config(1.0)), fel::InvalidArgument);
}

TEST(CvBandwidth, MatchesBruteForceOracle) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  const std::size_t n = 20;
  std::vector<double> levels, y;
  for (std::size_t i = 0; i < n; ++i) {
    levels.push_back(u(rng));
    y.push_back(std::sin(6.0 * levels.back()) + noise(rng));
  }
  const FunctionalDataset ds = constant_dataset(g, levels, y);
  const std::vector<double> candidates =
      fel::default_h_grid(ds, SemiMetricSpec::deriv_l2(0), 8);
  const double chosen = fel::cv_bandwidth(ds, cv_config(candidates));

  // Brute force: rebuild each leave-one-out dataset and reuse the public
  // estimator; empty neighborhoods contribute the sample variance of Y.
  const double penalty = fel::sample_variance(y);
  std::vector<double> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  double best_h = sorted.front();
  double best_crit = 1e300;
  for (double h : sorted) {
    double crit = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> lv, ly;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        lv.push_back(levels[j]);
        ly.push_back(y[j]);
      }
      const FunctionalDataset loo = constant_dataset(g, lv, ly);
      try {
        const double pred =
            fel::nw_estimate(loo, constant_curve(g, levels[i]), l2_config(h));
        crit += (y[i] - pred) * (y[i] - pred);
      } catch (const fel::EmptyNeighborhood&) {
        crit += penalty;
      }
    }
    if (crit <= best_crit) {
      best_crit = crit;
      best_h = h;
    }
  }
  EXPECT_DOUBLE_EQ(chosen, best_h);

  // And the choice is always an element of the candidate grid.
  EXPECT_NE(std::find(candidates.begin(), candidates.end(), chosen),
            candidates.end());
}

TEST(Smoother, ResolvesCvOnceAndExposesState) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> levels, y;
  for (int i = 0; i < 12; ++i) {
    levels.push_back(u(rng));
    y.push_back(levels.back() * 2.0 + 0.05 * u(rng));
  }
  const FunctionalDataset ds = constant_dataset(g, levels, y);
  const std::vector<double> candidates =
      fel::default_h_grid(ds, SemiMetricSpec::deriv_l2(0), 5);
  const fel::Smoother sm(ds, cv_config(candidates));
  EXPECT_DOUBLE_EQ(sm.bandwidth(), fel::cv_bandwidth(ds, cv_config(candidates)));
  EXPECT_EQ(sm.train_fits().size(), levels.size());
  EXPECT_EQ(sm.sigma2_count(), levels.size());
  EXPECT_GE(sm.sigma2(), 0.0);

  // Self-inclusive fits match the public estimator at each training curve.
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double direct =
        fel::nw_estimate(ds, ds.curve(i), l2_config(sm.bandwidth()));
    EXPECT_NEAR(sm.train_fits()[i], direct, 1e-12);
  }
}

TEST(Smoother, LeaveOneOutFitsDropSelf) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 3);
  const FunctionalDataset ds =
      constant_dataset(g, {0.0, 0.1, 0.9}, {1.0, 2.0, 10.0});
  SmootherConfig cfg = l2_config(0.5);
  cfg.loo_train_fits = true;
  const fel::Smoother sm(ds, cfg);
  // Curves 0 and 1 see each other; curve 2 is isolated.
  EXPECT_NEAR(sm.train_fits()[0], 2.0, 1e-12);
  EXPECT_NEAR(sm.train_fits()[1], 1.0, 1e-12);
  EXPECT_TRUE(std::isnan(sm.train_fits()[2]));
  EXPECT_EQ(sm.sigma2_count(), 2u);
}

}  // namespace
