// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <fel/errors.hpp>
#include <fel/grid.hpp>
#include <fel/intervals.hpp>
#include <fel/io.hpp>
#include <fel/plm.hpp>
#include <fel/semimetric.hpp>
#include <fel/series.hpp>
#include <fel/simulation.hpp>
#include <fel/smoothing.hpp>

namespace fel {
namespace cli {

// Exit codes, one per error category.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitEmptyNeighborhood = 4;
constexpr int kExitNumeric = 5;

namespace detail {

inline SemiMetricSpec parse_semimetric(const std::string& s) {
  const std::size_t colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  int arg = -1;
  if (colon != std::string::npos) {
    try {
      arg = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("bad semimetric argument in '" + s + "'");
    }
  }
  if (kind == "deriv") return SemiMetricSpec::deriv_l2(arg < 0 ? 1 : arg);
  if (kind == "pca") return SemiMetricSpec::pca(arg < 0 ? 4 : arg);
  throw InvalidArgument("unknown semimetric '" + s + "' (use deriv:k or pca:q)");
}

struct BandwidthOpt {
  bool cv = true;
  int cv_count = 15;
  double fixed = 0.0;
};

inline BandwidthOpt parse_bandwidth(const std::string& s) {
  BandwidthOpt b;
  if (s == "cv") return b;
  const std::size_t colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? std::string() : s.substr(colon + 1);
  try {
    if (kind == "cv" && !arg.empty()) {
      b.cv_count = std::stoi(arg);
      if (b.cv_count < 1) throw InvalidArgument("cv count must be >= 1");
      return b;
    }
    if (kind == "fixed" && !arg.empty()) {
      b.cv = false;
      b.fixed = std::stod(arg);
      return b;
    }
  } catch (const InvalidArgument&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidArgument("bad bandwidth '" + s + "'");
  }
  throw InvalidArgument("unknown bandwidth '" + s + "' (use cv, cv:N or fixed:h)");
}

inline std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> methods;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      const std::string name = s.substr(start, i - start);
      if (!name.empty()) methods.push_back(parse_method(name));
      start = i + 1;
    }
  }
  if (methods.empty()) throw InvalidArgument("no methods given");
  return methods;
}

inline std::string semimetric_label(const SemiMetricSpec& spec) {
  if (spec.kind() == SemiMetricSpec::Kind::deriv_l2) {
    return "deriv:" + std::to_string(spec.derivative_order());
  }
  return "pca:" + std::to_string(spec.components());
}

inline std::string bandwidth_label(const BandwidthOpt& b) {
  if (b.cv) return "cv:" + std::to_string(b.cv_count);
  return "fixed:" + io::fmt_g(b.fixed);
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += io::fmt_g(v[i]);
  }
  return s;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write file: " + path);
  return out;
}

struct CommonOpts {
  std::string data;
  std::string query;
  int split_train = -1;  // -1: not given
  std::string semimetric = "deriv:1";
  std::string kernel = "quadratic";
  std::string bandwidth = "cv";
  double alpha = 0.05;
  std::string methods = "el,el_corrected,normal,normal_corrected";
  std::uint64_t seed = 1;
  std::string out;
  bool allow_skips = false;
  bool loo_fits = false;
  double plm_bandwidth = 0.0;  // 0: same as main bandwidth
};

// Resolved per-run state shared by fit and interval.
struct RunContext {
  io::CurveTable train;
  io::CurveTable queries;
  SemiMetricSpec spec = SemiMetricSpec::deriv_l2(1);
  BandwidthOpt bw;
  KernelKind kernel = KernelKind::quadratic;
  FunctionalDataset dataset;  // original responses
  std::vector<double> beta;   // empty when no covariates
  std::optional<Smoother> smoother;  // over partial responses when PLM
  std::string data_path, query_path;
  int split_train = -1;

  RunContext() : dataset(make_placeholder()) {}

  static FunctionalDataset make_placeholder() {
    GridPtr g = uniform_grid(0.0, 1.0, 2);
    return FunctionalDataset({Curve(g, {0.0, 0.0})}, {0.0});
  }
};

inline io::CurveTable slice_table(const io::CurveTable& t, std::size_t begin,
                                  std::size_t end) {
  io::CurveTable s;
  s.grid = t.grid;
  s.covariate_dim = t.covariate_dim;
  if (t.responses) s.responses.emplace();
  for (std::size_t i = begin; i < end; ++i) {
    s.ids.push_back(t.ids[i]);
    s.curves.push_back(t.curves[i]);
    if (t.responses) s.responses->push_back((*t.responses)[i]);
    for (std::size_t k = 0; k < t.covariate_dim; ++k) {
      s.covariates.push_back(t.covariates[i * t.covariate_dim + k]);
    }
  }
  return s;
}

inline RunContext prepare_run(const CommonOpts& opts) {
  RunContext ctx;
  ctx.data_path = opts.data;
  ctx.query_path = opts.query;
  ctx.split_train = opts.split_train;
  io::CurveTable full = io::load_curves(opts.data);

  if (!opts.query.empty() && opts.split_train >= 0) {
    throw InvalidArgument("--query and --split-train are mutually exclusive");
  }
  if (!opts.query.empty()) {
    ctx.train = std::move(full);
    ctx.queries = io::load_curves(opts.query);
    if (!same_grid(ctx.queries.grid, ctx.train.grid)) {
      throw GridMismatch("query grid differs from the training grid");
    }
    // Share one grid object so downstream checks are cheap.
    ctx.queries.grid = ctx.train.grid;
    for (Curve& c : ctx.queries.curves) {
      c = Curve(ctx.train.grid, c.values());
    }
  } else if (opts.split_train >= 0) {
    const std::size_t n_train = static_cast<std::size_t>(opts.split_train);
    if (n_train < 2 || n_train >= full.size()) {
      throw InvalidArgument("--split-train must leave >= 2 training and >= 1 query rows");
    }
    ctx.train = slice_table(full, 0, n_train);
    ctx.queries = slice_table(full, n_train, full.size());
  } else {
    throw InvalidArgument("give queries via --query FILE or --split-train N");
  }

  ctx.dataset = ctx.train.to_dataset();

  ctx.spec = parse_semimetric(opts.semimetric);
  if (ctx.spec.kind() == SemiMetricSpec::Kind::pca && !ctx.spec.fitted()) {
    ctx.spec = fit_pca_semimetric(ctx.dataset, ctx.spec.components());
  }
  ctx.kernel = parse_kernel(opts.kernel);
  ctx.bw = parse_bandwidth(opts.bandwidth);

  SmootherConfig cfg;
  cfg.kernel = ctx.kernel;
  cfg.semimetric = ctx.spec;
  cfg.loo_train_fits = opts.loo_fits;
  if (ctx.bw.cv) {
    cfg.bandwidth = CvBandwidth{default_h_grid(ctx.dataset, ctx.spec, ctx.bw.cv_count)};
  } else {
    cfg.bandwidth = FixedBandwidth{ctx.bw.fixed};
  }
  const double h = fel::detail::resolve_bandwidth(ctx.dataset, cfg);
  cfg.bandwidth = FixedBandwidth{h};

  FunctionalDataset working = ctx.dataset;
  if (ctx.dataset.covariate_dim() > 0) {
    std::optional<double> ph;
    if (opts.plm_bandwidth > 0.0) ph = opts.plm_bandwidth;
    PLMFit fit = profile_beta(ctx.dataset, cfg, ph);
    ctx.beta = fit.beta;
    working = ctx.dataset.with_responses(std::move(fit.partial_responses));
  }
  ctx.smoother.emplace(std::move(working), std::move(cfg));
  return ctx;
}

/// z' beta shift for one query row; 0 when the model has no linear part or
/// the query file carries no covariates.
inline double query_shift(const RunContext& ctx, std::size_t q) {
  if (ctx.beta.empty() || ctx.queries.covariate_dim == 0) return 0.0;
  if (ctx.queries.covariate_dim != ctx.beta.size()) {
    throw InvalidArgument("query covariate columns do not match the fitted model");
  }
  double s = 0.0;
  for (std::size_t k = 0; k < ctx.beta.size(); ++k) {
    s += ctx.queries.covariates[q * ctx.queries.covariate_dim + k] * ctx.beta[k];
  }
  return s;
}

inline void write_run_config(std::ostream& out, const char* command,
                             const CommonOpts& opts, const RunContext& ctx) {
  out << "fel-report-version: 1\n\n";
  out << "[config]\n";
  out << "command = " << command << '\n';
  out << "data = " << ctx.data_path << '\n';
  if (!ctx.query_path.empty()) out << "query = " << ctx.query_path << '\n';
  if (ctx.split_train >= 0) out << "split_train = " << ctx.split_train << '\n';
  out << "n_train = " << ctx.train.size() << '\n';
  out << "n_query = " << ctx.queries.size() << '\n';
  out << "semimetric = " << semimetric_label(ctx.spec) << '\n';
  out << "kernel = " << to_string(ctx.kernel) << '\n';
  out << "bandwidth = " << bandwidth_label(ctx.bw) << '\n';
  out << "resolved_h = " << io::fmt_g(ctx.smoother->bandwidth()) << '\n';
  out << "alpha = " << io::fmt_g(opts.alpha) << '\n';
  out << "seed = " << opts.seed << '\n';
  out << "loo_fits = " << (opts.loo_fits ? 1 : 0) << '\n';
  out << "allow_skips = " << (opts.allow_skips ? 1 : 0) << '\n';
  out << "p = " << ctx.dataset.covariate_dim() << '\n';
  if (!ctx.beta.empty()) out << "beta = " << join(ctx.beta) << '\n';
  out << "sigma2_hat = " << io::fmt_g(ctx.smoother->sigma2()) << '\n';
  out << "sigma2_count = " << ctx.smoother->sigma2_count() << '\n';
}

struct MethodCell {
  bool ok = false;
  IntervalResult res;
  SkipReason reason = SkipReason::none;
};

struct QueryRow {
  std::size_t index = 0;
  bool evaluated = false;  // point estimates available
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double estimate_corrected = std::numeric_limits<double>::quiet_NaN();
  SkipReason reason = SkipReason::none;
  std::vector<MethodCell> cells;
};

inline std::vector<QueryRow> evaluate_queries(const RunContext& ctx,
                                              const std::vector<Method>& methods,
                                              double alpha) {
  const Smoother& sm = *ctx.smoother;
  std::vector<QueryRow> rows(ctx.queries.size());
  for (std::size_t q = 0; q < ctx.queries.size(); ++q) {
    QueryRow& row = rows[q];
    row.index = q;
    row.cells.resize(methods.size());
    const Curve& x0 = ctx.queries.curves[q];
    double shift = 0.0;
    try {
      shift = query_shift(ctx, q);
      row.estimate = sm.nw(x0) + shift;
      row.estimate_corrected = corrected_center(sm, x0) + shift;
      row.evaluated = true;
    } catch (const EmptyNeighborhood&) {
      row.reason = SkipReason::empty_neighborhood;
      continue;
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      MethodCell& cell = row.cells[mi];
      try {
        cell.res = make_interval(sm, x0, alpha, methods[mi]);
        cell.res.estimate += shift;
        cell.res.lo += shift;
        cell.res.hi += shift;
        cell.ok = true;
      } catch (const EmptyNeighborhood&) {
        cell.reason = SkipReason::empty_neighborhood;
      } catch (const BracketingFailed&) {
        cell.reason = SkipReason::bracketing_failed;
      } catch (const DegenerateScores&) {
        cell.reason = SkipReason::degenerate;
      }
    }
  }
  return rows;
}

inline std::size_t count_skips(const std::vector<QueryRow>& rows) {
  std::size_t skips = 0;
  for (const QueryRow& row : rows) {
    if (!row.evaluated) {
      ++skips;
      continue;
    }
    for (const MethodCell& c : row.cells) {
      if (!c.ok) ++skips;
    }
  }
  return skips;
}

/// Indices of rows sorted by estimated response (skipped rows last), the
/// presentation order of the plot tables.
inline std::vector<std::size_t> plot_order(const std::vector<QueryRow>& rows) {
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].evaluated != rows[b].evaluated) return rows[a].evaluated;
    if (!rows[a].evaluated) return false;
    return rows[a].estimate < rows[b].estimate;
  });
  return order;
}

inline int finish_queries(const CommonOpts& opts, const std::vector<QueryRow>& rows) {
  const std::size_t skips = count_skips(rows);
  if (skips > 0 && !opts.allow_skips) {
    std::fprintf(stderr,
                 "error (empty-neighborhood): %zu skipped query evaluations; "
                 "re-run with --allow-skips to accept\n",
                 skips);
    return kExitEmptyNeighborhood;
  }
  return kExitOk;
}

inline int run_fit(const CommonOpts& opts) {
  RunContext ctx = prepare_run(opts);
  std::vector<QueryRow> rows = evaluate_queries(ctx, {}, opts.alpha);

  std::size_t n_eval = 0;
  double mse_nw = 0.0, mse_corr = 0.0;
  const bool have_y = ctx.queries.has_responses();
  for (const QueryRow& row : rows) {
    if (!row.evaluated) continue;
    ++n_eval;
    if (have_y) {
      const double y = (*ctx.queries.responses)[row.index];
      mse_nw += (row.estimate - y) * (row.estimate - y);
      mse_corr += (row.estimate_corrected - y) * (row.estimate_corrected - y);
    }
  }

  auto report = open_out(opts.out + ".report.txt");
  write_run_config(report, "fit", opts, ctx);
  report << "\n[summary]\n";
  report << "n_evaluated = " << n_eval << '\n';
  report << "n_skipped = " << (rows.size() - n_eval) << '\n';
  if (have_y && n_eval > 0) {
    report << "mse_estimate = " << io::fmt_f(mse_nw / static_cast<double>(n_eval)) << '\n';
    report << "mse_corrected = " << io::fmt_f(mse_corr / static_cast<double>(n_eval)) << '\n';
  }
  report << "\n[records]\n";
  report << "# query id estimate estimate_corrected y skipped\n";
  for (const QueryRow& row : rows) {
    report << row.index << ' ' << ctx.queries.ids[row.index] << ' '
           << io::fmt_g(row.estimate) << ' ' << io::fmt_g(row.estimate_corrected)
           << ' '
           << (have_y ? io::fmt_g((*ctx.queries.responses)[row.index])
                      : std::string("nan"))
           << ' ' << (row.evaluated ? 0 : 1) << '\n';
  }

  auto plot = open_out(opts.out + ".plot.csv");
  plot << "rank,id,estimate,estimate_corrected,y\n";
  std::size_t rank = 0;
  for (std::size_t i : plot_order(rows)) {
    plot << rank++ << ',' << ctx.queries.ids[i] << ',' << io::fmt_g(rows[i].estimate)
         << ',' << io::fmt_g(rows[i].estimate_corrected) << ','
         << (have_y ? io::fmt_g((*ctx.queries.responses)[i]) : std::string("nan"))
         << '\n';
  }

  std::printf("fit: %zu queries evaluated, %zu skipped; wrote %s.report.txt\n",
              n_eval, rows.size() - n_eval, opts.out.c_str());
  return finish_queries(opts, rows);
}

inline int run_interval(const CommonOpts& opts) {
  RunContext ctx = prepare_run(opts);
  const std::vector<Method> methods = parse_methods(opts.methods);
  std::vector<QueryRow> rows = evaluate_queries(ctx, methods, opts.alpha);
  const bool have_y = ctx.queries.has_responses();

  auto report = open_out(opts.out + ".report.txt");
  write_run_config(report, "interval", opts, ctx);
  report << "methods = " << io::method_list(methods) << '\n';
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::size_t n_eval = 0, n_skip = 0;
    double len = 0.0;
    for (const QueryRow& row : rows) {
      if (row.evaluated && row.cells[mi].ok) {
        ++n_eval;
        len += row.cells[mi].res.hi - row.cells[mi].res.lo;
      } else {
        ++n_skip;
      }
    }
    report << "\n[method " << to_string(methods[mi]) << "]\n";
    report << "n_evaluated = " << n_eval << '\n';
    report << "n_skipped = " << n_skip << '\n';
    report << "avg_length = "
           << (n_eval > 0 ? io::fmt_f(len / static_cast<double>(n_eval))
                          : std::string("nan"))
           << '\n';
  }
  report << "\n[records]\n";
  report << "# query id method estimate lo hi length y skipped reason\n";
  for (const QueryRow& row : rows) {
    const std::string y =
        have_y ? io::fmt_g((*ctx.queries.responses)[row.index]) : std::string("nan");
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const MethodCell& cell = row.cells[mi];
      const SkipReason reason = row.evaluated ? cell.reason : row.reason;
      report << row.index << ' ' << ctx.queries.ids[row.index] << ' '
             << to_string(methods[mi]) << ' ';
      if (row.evaluated && cell.ok) {
        report << io::fmt_g(cell.res.estimate) << ' ' << io::fmt_g(cell.res.lo)
               << ' ' << io::fmt_g(cell.res.hi) << ' '
               << io::fmt_g(cell.res.hi - cell.res.lo);
      } else {
        report << "nan nan nan nan";
      }
      report << ' ' << y << ' ' << ((row.evaluated && cell.ok) ? 0 : 1) << ' '
             << to_string(reason) << '\n';
    }
  }

  auto plot = open_out(opts.out + ".plot.csv");
  plot << "rank,id,estimate,estimate_corrected,y";
  for (Method m : methods) {
    plot << ',' << to_string(m) << "_lo," << to_string(m) << "_hi";
  }
  plot << '\n';
  std::size_t rank = 0;
  for (std::size_t i : plot_order(rows)) {
    const QueryRow& row = rows[i];
    plot << rank++ << ',' << ctx.queries.ids[i] << ',' << io::fmt_g(row.estimate)
         << ',' << io::fmt_g(row.estimate_corrected) << ','
         << (have_y ? io::fmt_g((*ctx.queries.responses)[i]) : std::string("nan"));
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      if (row.evaluated && row.cells[mi].ok) {
        plot << ',' << io::fmt_g(row.cells[mi].res.lo) << ','
             << io::fmt_g(row.cells[mi].res.hi);
      } else {
        plot << ",nan,nan";
      }
    }
    plot << '\n';
  }

  const std::size_t skips = count_skips(rows);
  std::printf("interval: %zu queries x %zu methods, %zu skipped; wrote %s.report.txt\n",
              rows.size(), methods.size(), skips, opts.out.c_str());
  return finish_queries(opts, rows);
}

struct SimulateOpts {
  std::size_t n = 200;
  double sigma2 = 0.5;
  std::uint64_t seed = 1;
  std::size_t grid_points = 101;
  std::string out = "fel_data.csv";
};

inline int run_simulate(const SimulateOpts& opts) {
  if (opts.n < 1) throw InvalidConfig("simulate needs n >= 1");
  if (!(opts.sigma2 > 0.0)) throw InvalidConfig("sigma2 must be positive");
  if (opts.grid_points < 3) throw InvalidConfig("grid needs >= 3 points");
  GridPtr grid = uniform_grid(-1.0, 1.0, opts.grid_points);
  Rng rng = Rng::stream(opts.seed, 0);
  const double sigma = std::sqrt(opts.sigma2);

  io::CurveTable table;
  table.grid = grid;
  table.responses.emplace();
  for (std::size_t i = 0; i < opts.n; ++i) {
    auto [curve, params] = generate_curve(rng, grid);
    table.ids.push_back("s" + std::to_string(i));
    table.curves.push_back(std::move(curve));
    table.responses->push_back(true_regression(params) + sigma * rng.gaussian());
  }
  io::save_curves(opts.out, table);

  auto report = open_out(opts.out + ".report.txt");
  report << "fel-report-version: 1\n\n[config]\n";
  report << "command = simulate\n";
  report << "n = " << opts.n << '\n';
  report << "sigma2 = " << io::fmt_g(opts.sigma2) << '\n';
  report << "seed = " << opts.seed << '\n';
  report << "grid = " << io::describe_grid(*grid) << '\n';
  report << "out = " << opts.out << '\n';

  std::printf("simulate: wrote %zu samples to %s\n", opts.n, opts.out.c_str());
  return kExitOk;
}

struct CoverageOpts {
  SimConfig config;
  std::size_t grid_points = 101;
  std::string methods = "el,el_corrected,normal,normal_corrected";
  std::string kernel = "quadratic";
  std::string out = "fel_coverage";
  bool allow_skips = false;
};

inline int run_coverage(const CoverageOpts& opts) {
  SimConfig cfg = opts.config;
  cfg.methods = parse_methods(opts.methods);
  cfg.kernel = parse_kernel(opts.kernel);
  if (opts.grid_points < 3) throw InvalidConfig("grid needs >= 3 points");
  cfg.grid = uniform_grid(-1.0, 1.0, opts.grid_points);
  const CoverageReport report = run_coverage_study(cfg);

  auto rep = open_out(opts.out + ".report.txt");
  io::write_coverage_report(rep, report);
  auto plot = open_out(opts.out + ".plot.csv");
  io::write_coverage_plot(plot, report);

  std::size_t skipped = 0;
  for (const MethodSummary& s : report.summaries) {
    skipped += s.n_skipped;
    std::printf("coverage %-16s coverage=%.3f avg_length=%.3f evaluated=%zu skipped=%zu\n",
                to_string(s.method).c_str(), s.coverage, s.avg_length,
                s.n_evaluated, s.n_skipped);
  }
  std::printf("coverage: wrote %s.report.txt\n", opts.out.c_str());
  if (skipped > 0 && !opts.allow_skips) {
    std::fprintf(stderr,
                 "error (empty-neighborhood): %zu skipped interval evaluations; "
                 "re-run with --allow-skips to accept\n",
                 skipped);
    return kExitEmptyNeighborhood;
  }
  return kExitOk;
}

struct WindowizeOpts {
  std::string series;
  std::size_t window = 12;
  std::size_t horizon = 1;
  std::size_t stride = 1;
  std::string out = "fel_windowed.csv";
};

inline int run_windowize(const WindowizeOpts& opts) {
  const std::vector<double> series = io::load_series(opts.series);
  const FunctionalDataset ds =
      series_to_curves(series, opts.window, opts.horizon, opts.stride);

  io::CurveTable table;
  table.grid = ds.grid_ptr();
  table.responses.emplace(ds.responses());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    table.ids.push_back("w" + std::to_string(i));
    table.curves.push_back(ds.curve(i));
  }
  io::save_curves(opts.out, table);

  auto report = open_out(opts.out + ".report.txt");
  report << "fel-report-version: 1\n\n[config]\n";
  report << "command = windowize\n";
  report << "series = " << opts.series << '\n';
  report << "series_length = " << series.size() << '\n';
  report << "window = " << opts.window << '\n';
  report << "horizon = " << opts.horizon << '\n';
  report << "stride = " << opts.stride << '\n';
  report << "n = " << ds.size() << '\n';
  report << "out = " << opts.out << '\n';

  std::printf("windowize: %zu samples from %zu observations -> %s\n", ds.size(),
              series.size(), opts.out.c_str());
  return kExitOk;
}

inline int classify_and_report(const std::exception& e) {
  const char* category = "error";
  int code = kExitError;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const MissingColumn*>(&e) ||
      dynamic_cast<const InsufficientData*>(&e) ||
      dynamic_cast<const GridMismatch*>(&e) || dynamic_cast<const GridTooShort*>(&e) ||
      dynamic_cast<const SpecNotFitted*>(&e) ||
      dynamic_cast<const InvalidComponents*>(&e)) {
    category = "data";
    code = kExitData;
  } else if (dynamic_cast<const EmptyNeighborhood*>(&e)) {
    category = "empty-neighborhood";
    code = kExitEmptyNeighborhood;
  } else if (dynamic_cast<const BracketingFailed*>(&e) ||
             dynamic_cast<const DegenerateScores*>(&e) ||
             dynamic_cast<const DegenerateDistances*>(&e) ||
             dynamic_cast<const SingularDesign*>(&e)) {
    category = "numeric";
    code = kExitNumeric;
  } else if (dynamic_cast<const InvalidArgument*>(&e) ||
             dynamic_cast<const InvalidConfig*>(&e)) {
    category = "usage";
    code = kExitUsage;
  }
  std::fprintf(stderr, "error (%s): %s\n", category, e.what());
  return code;
}

}  // namespace detail

/// Command-line front end. Returns the process exit code.
inline int run(std::vector<std::string> args) {
  CLI::App app{"Nonparametric regression for curve-valued covariates with "
               "empirical-likelihood confidence intervals"};
  app.require_subcommand(1);

  detail::CommonOpts common;
  detail::SimulateOpts sim;
  detail::CoverageOpts cov;
  detail::WindowizeOpts win;

  const auto add_common = [&common](CLI::App* cmd, bool with_methods) {
    cmd->add_option("--data", common.data, "training curve file (csv)")->required();
    cmd->add_option("--query", common.query, "query curve file (csv)");
    cmd->add_option("--split-train", common.split_train,
                    "use the first N rows of --data as training, the rest as "
                    "queries (165 matches the usual spectrometric split)");
    cmd->add_option("--semimetric", common.semimetric, "deriv:k or pca:q")
        ->capture_default_str();
    cmd->add_option("--kernel", common.kernel, "quadratic or uniform")
        ->capture_default_str();
    cmd->add_option("--bandwidth", common.bandwidth, "cv, cv:N or fixed:h")
        ->capture_default_str();
    cmd->add_option("--alpha", common.alpha, "interval level is 1 - alpha")
        ->capture_default_str();
    if (with_methods) {
      cmd->add_option("--methods", common.methods,
                      "comma list of el,el_corrected,euclidean,normal,normal_corrected")
          ->capture_default_str();
    }
    cmd->add_option("--seed", common.seed, "random seed (echoed in reports)")
        ->capture_default_str();
    cmd->add_option("--out", common.out, "output prefix")->required();
    cmd->add_flag("--allow-skips", common.allow_skips,
                  "exit 0 even when some queries are skipped");
    cmd->add_flag("--loo-fits", common.loo_fits,
                  "leave-one-out in-sample fits for bias correction and sigma2");
    cmd->add_option("--plm-bandwidth", common.plm_bandwidth,
                    "separate bandwidth for the profiling smoother matrix");
  };

  CLI::App* fit = app.add_subcommand("fit", "point estimates at query curves");
  add_common(fit, false);
  CLI::App* interval =
      app.add_subcommand("interval", "confidence intervals at query curves");
  add_common(interval, true);

  CLI::App* simulate =
      app.add_subcommand("simulate", "write a synthetic curve dataset");
  simulate->add_option("--n", sim.n, "sample count")->capture_default_str();
  simulate->add_option("--sigma2", sim.sigma2, "noise variance")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  simulate->add_option("--grid-points", sim.grid_points, "grid resolution")
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "output csv path")->capture_default_str();

  CLI::App* coverage =
      app.add_subcommand("coverage", "Monte Carlo coverage study");
  coverage->add_option("--n", cov.config.n, "training sample count")
      ->capture_default_str();
  coverage->add_option("--sigma2", cov.config.sigma2, "noise variance")
      ->capture_default_str();
  coverage->add_option("--n-test", cov.config.n_test, "test curves per replication")
      ->capture_default_str();
  coverage->add_option("--reps", cov.config.n_reps, "replications")
      ->capture_default_str();
  coverage->add_option("--alpha", cov.config.alpha, "interval level is 1 - alpha")
      ->capture_default_str();
  coverage->add_option("--seed", cov.config.seed, "random seed")->capture_default_str();
  coverage->add_option("--cv-candidates", cov.config.cv_candidates,
                       "cross-validation grid size")
      ->capture_default_str();
  coverage->add_option("--grid-points", cov.grid_points, "grid resolution")
      ->capture_default_str();
  coverage->add_option("--methods", cov.methods, "interval methods")
      ->capture_default_str();
  coverage->add_option("--kernel", cov.kernel, "quadratic or uniform")
      ->capture_default_str();
  coverage->add_option("--out", cov.out, "output prefix")->capture_default_str();
  coverage->add_flag("--allow-skips", cov.allow_skips,
                     "exit 0 even when some intervals are skipped");
  coverage->add_flag("!--no-loo-fits", cov.config.loo_train_fits,
                     "use self-inclusive in-sample fits instead of leave-one-out");

  CLI::App* windowize = app.add_subcommand(
      "windowize", "turn a scalar series into a lagged curve dataset");
  windowize->add_option("--series", win.series, "series file, one value per line")
      ->required();
  windowize->add_option("--window", win.window, "curve length")->capture_default_str();
  windowize->add_option("--horizon", win.horizon, "steps ahead of the window end")
      ->capture_default_str();
  windowize->add_option("--stride", win.stride, "offset between windows")
      ->capture_default_str();
  windowize->add_option("--out", win.out, "output csv path")->capture_default_str();

  std::vector<const char*> argv;
  argv.push_back("fel");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (fit->parsed()) return detail::run_fit(common);
    if (interval->parsed()) return detail::run_interval(common);
    if (simulate->parsed()) return detail::run_simulate(sim);
    if (coverage->parsed()) return detail::run_coverage(cov);
    if (windowize->parsed()) return detail::run_windowize(win);
  } catch (const std::exception& e) {
    return detail::classify_and_report(e);
  }
  return kExitUsage;
}

}  // namespace cli
}  // namespace fel
