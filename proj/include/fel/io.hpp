// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fel/errors.hpp>
#include <fel/grid.hpp>
#include <fel/intervals.hpp>
#include <fel/simulation.hpp>

namespace fel {
namespace io {

/// Full double-precision round trip.
inline std::string fmt_g(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Fixed six decimals, for summary figures.
inline std::string fmt_f(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      cells.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return cells;
}

inline bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;  // from_chars rejects a leading plus
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

inline double parse_cell(std::string_view cell, std::size_t line,
                         std::size_t column) {
  double v = 0.0;
  if (!parse_double(cell, v)) {
    throw ParseError("non-numeric cell '" + std::string(cell) + "'", line, column);
  }
  return v;
}

}  // namespace detail

/// In-memory image of a curve file: one sample per row with a string id,
/// curve values over a shared grid, and optional response / covariate
/// columns.
struct CurveTable {
  GridPtr grid;
  std::vector<std::string> ids;
  std::vector<Curve> curves;
  std::optional<std::vector<double>> responses;
  std::vector<double> covariates;  // n x p, row-major
  std::size_t covariate_dim = 0;

  std::size_t size() const { return curves.size(); }

  bool has_responses() const { return responses.has_value(); }

  FunctionalDataset to_dataset() const {
    if (!responses) {
      throw MissingColumn("dataset requires a response column 'y'");
    }
    return FunctionalDataset(curves, *responses, covariates, covariate_dim);
  }
};

/// Loads a comma-separated curve file. An optional first header row starts
/// with the literal cell `id`, followed by the numeric grid abscissae, an
/// optional `y` response column and optional `z1..zp` covariate columns,
/// in that order. Without a header every row is data, the grid defaults to
/// 1..m, and no response or covariates are present.
inline CurveTable load_curves(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open file: " + path);

  CurveTable table;
  bool header_parsed = false;
  bool has_y = false;
  std::size_t p = 0;
  std::size_t m = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;

  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = detail::split_csv(line);
    if (cells.size() == 1 && cells[0].empty()) continue;  // blank line

    if (first_content_line) {
      first_content_line = false;
      if (cells[0] == "id") {
        // Header: grid abscissae, then optional y, then z1..zp.
        std::vector<double> pts;
        std::size_t c = 1;
        double v = 0.0;
        while (c < cells.size() && detail::parse_double(cells[c], v)) {
          pts.push_back(v);
          ++c;
        }
        if (pts.size() < 2) {
          throw ParseError("header must list at least 2 grid abscissae", line_no);
        }
        if (c < cells.size() && cells[c] == "y") {
          has_y = true;
          ++c;
        }
        while (c < cells.size()) {
          const std::string expected = "z" + std::to_string(p + 1);
          if (cells[c] != expected) {
            throw ParseError("unexpected header column '" + std::string(cells[c]) +
                                 "', expected '" + expected + "'",
                             line_no, c + 1);
          }
          ++p;
          ++c;
        }
        table.grid = std::make_shared<const Grid>(std::move(pts));
        m = table.grid->size();
        header_parsed = true;
        if (has_y) table.responses.emplace();
        table.covariate_dim = p;
        continue;
      }
    }

    if (!header_parsed && m == 0) {
      if (cells.size() < 3) {
        throw ParseError("row needs an id and at least 2 curve values", line_no);
      }
      m = cells.size() - 1;
      std::vector<double> pts(m);
      for (std::size_t j = 0; j < m; ++j) pts[j] = static_cast<double>(j + 1);
      table.grid = std::make_shared<const Grid>(std::move(pts));
    }

    const std::size_t expected = 1 + m + (has_y ? 1 : 0) + p;
    if (cells.size() != expected) {
      throw ParseError("row has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(expected),
                       line_no);
    }
    if (cells[0].empty()) throw ParseError("empty id", line_no, 1);
    table.ids.emplace_back(cells[0]);

    std::vector<double> vals(m);
    for (std::size_t j = 0; j < m; ++j) {
      vals[j] = detail::parse_cell(cells[1 + j], line_no, 2 + j);
    }
    table.curves.emplace_back(table.grid, std::move(vals));
    std::size_t c = 1 + m;
    if (has_y) {
      table.responses->push_back(detail::parse_cell(cells[c], line_no, c + 1));
      ++c;
    }
    for (std::size_t k = 0; k < p; ++k, ++c) {
      table.covariates.push_back(detail::parse_cell(cells[c], line_no, c + 1));
    }
  }

  if (table.curves.empty()) {
    throw InsufficientData("no data rows in " + path);
  }
  return table;
}

/// Writes a curve table in the format load_curves reads, with full
/// double precision so a round trip is exact.
inline void save_curves(std::ostream& out, const CurveTable& table) {
  out << "id";
  for (double t : table.grid->points()) out << ',' << fmt_g(t);
  if (table.responses) out << ",y";
  for (std::size_t k = 0; k < table.covariate_dim; ++k) out << ",z" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.ids[i];
    for (double v : table.curves[i].values()) out << ',' << fmt_g(v);
    if (table.responses) out << ',' << fmt_g((*table.responses)[i]);
    for (std::size_t k = 0; k < table.covariate_dim; ++k) {
      out << ',' << fmt_g(table.covariates[i * table.covariate_dim + k]);
    }
    out << '\n';
  }
}

inline void save_curves(const std::string& path, const CurveTable& table) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write file: " + path);
  save_curves(out, table);
}

/// Loads a scalar series: whitespace/newline-separated numbers; text after
/// '#' on a line is ignored.
inline std::vector<double> load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open file: " + path);
  std::vector<double> series;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) {
      double v = 0.0;
      if (!detail::parse_double(token, v)) {
        throw ParseError("non-numeric series value '" + token + "'", line_no);
      }
      series.push_back(v);
    }
  }
  if (series.empty()) throw InsufficientData("no series values in " + path);
  return series;
}

inline std::string describe_grid(const Grid& g) {
  return fmt_g(g.points().front()) + ":" + fmt_g(g.points().back()) + ":" +
         std::to_string(g.size());
}

inline std::string method_list(const std::vector<Method>& methods) {
  std::string s;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i > 0) s += ',';
    s += to_string(methods[i]);
  }
  return s;
}

/// Key-value report of a coverage study; stable schema, deterministic
/// bytes for a given report.
inline void write_coverage_report(std::ostream& out, const CoverageReport& rep) {
  const SimConfig& cfg = rep.config;
  out << "fel-report-version: 1\n\n";
  out << "[config]\n";
  out << "command = coverage\n";
  out << "n = " << cfg.n << '\n';
  out << "sigma2 = " << fmt_g(cfg.sigma2) << '\n';
  out << "n_test = " << cfg.n_test << '\n';
  out << "n_reps = " << cfg.n_reps << '\n';
  out << "alpha = " << fmt_g(cfg.alpha) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "kernel = " << to_string(cfg.kernel) << '\n';
  out << "semimetric = deriv:1\n";
  out << "bandwidth = cv:" << cfg.cv_candidates << '\n';
  out << "loo_fits = " << (cfg.loo_train_fits ? 1 : 0) << '\n';
  out << "grid = " << describe_grid(*cfg.grid) << '\n';
  out << "methods = " << method_list(cfg.methods) << '\n';
  out << '\n';
  out << "[bandwidths]\n";
  for (std::size_t r = 0; r < rep.bandwidths.size(); ++r) {
    out << "rep " << r << " = " << fmt_g(rep.bandwidths[r]) << '\n';
  }
  out << '\n';
  for (const MethodSummary& s : rep.summaries) {
    out << "[method " << to_string(s.method) << "]\n";
    out << "coverage = " << fmt_f(s.coverage) << '\n';
    out << "avg_length = " << fmt_f(s.avg_length) << '\n';
    out << "n_evaluated = " << s.n_evaluated << '\n';
    out << "n_skipped = " << s.n_skipped << '\n';
    out << '\n';
  }
  out << "[records]\n";
  out << "# rep query method true_r estimate lo hi covered skipped reason\n";
  for (const SimRecord& r : rep.records) {
    out << r.rep << ' ' << r.query << ' ' << to_string(r.method) << ' '
        << fmt_g(r.true_r) << ' ' << fmt_g(r.estimate) << ' ' << fmt_g(r.lo)
        << ' ' << fmt_g(r.hi) << ' ' << (r.covered ? 1 : 0) << ' '
        << (r.skipped ? 1 : 0) << ' ' << to_string(r.reason) << '\n';
  }
}

inline std::string coverage_report_text(const CoverageReport& rep) {
  std::ostringstream ss;
  write_coverage_report(ss, rep);
  return ss.str();
}

/// Plot-ready table of the per-query records, sorted by estimated
/// response; skipped records sort last.
inline void write_coverage_plot(std::ostream& out, const CoverageReport& rep) {
  std::vector<const SimRecord*> rows;
  rows.reserve(rep.records.size());
  for (const SimRecord& r : rep.records) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SimRecord* a, const SimRecord* b) {
                     if (a->skipped != b->skipped) return b->skipped;
                     if (a->skipped) return false;
                     return a->estimate < b->estimate;
                   });
  out << "rank,rep,query,method,true_r,estimate,lo,hi,length,covered\n";
  std::size_t rank = 0;
  for (const SimRecord* r : rows) {
    out << rank++ << ',' << r->rep << ',' << r->query << ',' << to_string(r->method)
        << ',' << fmt_g(r->true_r) << ',' << fmt_g(r->estimate) << ','
        << fmt_g(r->lo) << ',' << fmt_g(r->hi) << ',' << fmt_g(r->hi - r->lo)
        << ',' << (r->covered ? 1 : 0) << '\n';
  }
}

}  // namespace io
}  // namespace fel
