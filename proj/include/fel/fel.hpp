// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fel/empirical_likelihood.hpp>
#include <fel/errors.hpp>
#include <fel/grid.hpp>
#include <fel/integrate.hpp>
#include <fel/intervals.hpp>
#include <fel/io.hpp>
#include <fel/kernel.hpp>
#include <fel/plm.hpp>
#include <fel/rng.hpp>
#include <fel/roots.hpp>
#include <fel/semimetric.hpp>
#include <fel/series.hpp>
#include <fel/simulation.hpp>
#include <fel/smoothing.hpp>
#include <fel/stats.hpp>
#include <fel/threads.hpp>
