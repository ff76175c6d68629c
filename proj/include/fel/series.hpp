// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <fel/errors.hpp>
#include <fel/grid.hpp>

namespace fel {

/// Turns a scalar time series into a functional dataset for h-step-ahead
/// prediction: each covariate curve is a length-`window` slice of the
/// series on the grid {1, ..., window}, and its response is the
/// observation `horizon` steps after the slice ends. Consecutive slices
/// start `stride` observations apart.
inline FunctionalDataset series_to_curves(std::span<const double> series,
                                          std::size_t window, std::size_t horizon,
                                          std::size_t stride = 1) {
  if (window < 2) throw InvalidArgument("window must be >= 2");
  if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (series.size() < window + horizon) {
    throw InsufficientData("series shorter than window + horizon");
  }
  std::vector<double> pts(window);
  for (std::size_t j = 0; j < window; ++j) pts[j] = static_cast<double>(j + 1);
  GridPtr grid = std::make_shared<const Grid>(std::move(pts));

  std::vector<Curve> curves;
  std::vector<double> responses;
  for (std::size_t s = 0; s + window - 1 + horizon < series.size(); s += stride) {
    std::vector<double> vals(series.begin() + static_cast<std::ptrdiff_t>(s),
                             series.begin() + static_cast<std::ptrdiff_t>(s + window));
    curves.emplace_back(grid, std::move(vals));
    responses.push_back(series[s + window - 1 + horizon]);
  }
  return FunctionalDataset(std::move(curves), std::move(responses));
}

}  // namespace fel
