// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <fel/grid.hpp>

namespace {

using fel::Curve;
using fel::Grid;
using fel::GridPtr;

GridPtr make_grid(std::vector<double> pts) {
  return std::make_shared<const Grid>(std::move(pts));
}

TEST(Grid, ValidatesInput) {
  EXPECT_THROW(Grid({0.0}), fel::GridTooShort);
  EXPECT_THROW(Grid({0.0, 0.0, 1.0}), fel::InvalidArgument);
  EXPECT_THROW(Grid({0.0, 1.0, 0.5}), fel::InvalidArgument);
  EXPECT_THROW(Grid({0.0, std::nan(""), 1.0}), fel::InvalidArgument);
  EXPECT_NO_THROW(Grid({0.0, 1.0}));
}

TEST(Curve, ValidatesAgainstGrid) {
  GridPtr g = make_grid({0.0, 0.5, 1.0});
  EXPECT_THROW(Curve(g, {1.0, 2.0}), fel::InvalidArgument);
  EXPECT_THROW(Curve(g, {1.0, 2.0, std::nan("")}), fel::InvalidArgument);
  Curve c(g, {1.0, 2.0, 3.0});
  EXPECT_EQ(c.size(), 3u);
}

TEST(Quadrature, SingleInterval) {
  const std::vector<double> w = fel::quadrature_weights(Grid({0.0, 1.0}));
  ASSERT_EQ(w.size(), 2u);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
}

TEST(Quadrature, CompositeThreePoints) {
  const std::vector<double> w = fel::quadrature_weights(Grid({0.0, 0.5, 1.0}));
  ASSERT_EQ(w.size(), 3u);
  EXPECT_DOUBLE_EQ(w[0], 0.25);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
  EXPECT_DOUBLE_EQ(w[2], 0.25);
}

TEST(Quadrature, WeightsSumToSpan) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 101);
  const std::vector<double> w = fel::quadrature_weights(*g);
  double s = 0.0;
  for (double x : w) s += x;
  EXPECT_NEAR(s, 1.0, 1e-12);

  // Non-uniform grid: still telescopes to the span.
  const Grid g2({0.0, 0.1, 0.45, 0.5, 2.0});
  double s2 = 0.0;
  for (double x : fel::quadrature_weights(g2)) s2 += x;
  EXPECT_NEAR(s2, 2.0, 1e-12);
}

TEST(Derivative, ExactForAffine) {
  GridPtr g = make_grid({0.0, 0.5, 1.0});
  Curve c(g, {0.0, 1.0, 2.0});  // 2t
  const Curve d = fel::estimate_derivative(c, 1);
  for (double v : d.values()) EXPECT_DOUBLE_EQ(v, 2.0);
}

TEST(Derivative, ExactForQuadratic) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 5);  // {0,0.25,...,1}
  std::vector<double> vals;
  for (double t : g->points()) vals.push_back(t * t);
  const Curve d = fel::estimate_derivative(Curve(g, vals), 1);
  for (std::size_t j = 0; j < g->size(); ++j) {
    EXPECT_NEAR(d[j], 2.0 * (*g)[j], 1e-13);
  }
}

TEST(Derivative, SineAgainstCosine) {
  GridPtr g = fel::uniform_grid(0.0, 1.0, 101);
  std::vector<double> vals;
  for (double t : g->points()) vals.push_back(std::sin(t));
  const Curve d = fel::estimate_derivative(Curve(g, vals), 1);
  double max_err = 0.0;
  for (std::size_t j = 0; j < g->size(); ++j) {
    max_err = std::max(max_err, std::fabs(d[j] - std::cos((*g)[j])));
  }
  EXPECT_LT(max_err, 1e-3);
}

TEST(Derivative, SecondOrderOfCubic) {
  GridPtr g = fel::uniform_grid(-1.0, 1.0, 201);
  std::vector<double> vals;
  for (double t : g->points()) vals.push_back(t * t * t);
  const Curve d2 = fel::estimate_derivative(Curve(g, vals), 2);
  double max_err = 0.0;
  for (std::size_t j = 2; j + 2 < g->size(); ++j) {
    max_err = std::max(max_err, std::fabs(d2[j] - 6.0 * (*g)[j]));
  }
  EXPECT_LT(max_err, 1e-6);
}

TEST(Derivative, GridTooShort) {
  GridPtr g = make_grid({0.0, 1.0});
  Curve c(g, {0.0, 1.0});
  EXPECT_THROW(fel::estimate_derivative(c, 1), fel::GridTooShort);
  GridPtr g3 = make_grid({0.0, 0.5, 1.0});
  EXPECT_THROW(fel::estimate_derivative(Curve(g3, {0.0, 0.5, 1.0}), 2),
               fel::GridTooShort);
  EXPECT_THROW(fel::estimate_derivative(c, 0), fel::InvalidArgument);
}

TEST(Dataset, Invariants) {
  GridPtr g = make_grid({0.0, 1.0});
  GridPtr other = make_grid({0.0, 2.0});
  std::vector<Curve> curves{Curve(g, {0.0, 1.0}), Curve(other, {0.0, 1.0})};
  EXPECT_THROW(fel::FunctionalDataset(curves, {1.0, 2.0}), fel::GridMismatch);

  std::vector<Curve> ok{Curve(g, {0.0, 1.0}), Curve(g, {1.0, 0.0})};
  EXPECT_THROW(fel::FunctionalDataset(ok, {1.0}), fel::InvalidArgument);
  fel::FunctionalDataset ds(ok, {1.0, 2.0});
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_FALSE(ds.has_covariates());

  const fel::FunctionalDataset ds2 = ds.with_responses({5.0, 6.0});
  EXPECT_DOUBLE_EQ(ds2.response(0), 5.0);
  EXPECT_DOUBLE_EQ(ds.response(0), 1.0);
}

}  // namespace
