// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <fel/io.hpp>
#include <fel/series.hpp>

namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fel_io_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(path(name));
    out << content;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST(SeriesToCurves, IndexArithmetic) {
  std::vector<double> series;
  for (int i = 1; i <= 15; ++i) series.push_back(i);
  const fel::FunctionalDataset ds = fel::series_to_curves(series, 12, 1);
  ASSERT_EQ(ds.size(), 3u);
  for (std::size_t j = 0; j < 12; ++j) {
    EXPECT_DOUBLE_EQ(ds.curve(0)[j], static_cast<double>(j + 1));
    EXPECT_DOUBLE_EQ(ds.grid()[j], static_cast<double>(j + 1));
  }
  EXPECT_DOUBLE_EQ(ds.response(0), 13.0);
  EXPECT_DOUBLE_EQ(ds.response(1), 14.0);
  EXPECT_DOUBLE_EQ(ds.response(2), 15.0);
}

TEST(SeriesToCurves, LongHorizonAndStride) {
  std::vector<double> series(24);
  for (int i = 0; i < 24; ++i) series[static_cast<std::size_t>(i)] = i;
  const fel::FunctionalDataset one = fel::series_to_curves(series, 12, 12);
  EXPECT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one.response(0), 23.0);

  const fel::FunctionalDataset strided = fel::series_to_curves(series, 6, 2, 4);
  // starts at 0, 4, 8, 12, 16: s + 6 - 1 + 2 <= 23 for s <= 16.
  EXPECT_EQ(strided.size(), 5u);
  EXPECT_DOUBLE_EQ(strided.curve(1)[0], 4.0);
  EXPECT_DOUBLE_EQ(strided.response(1), 11.0);
}

TEST(SeriesToCurves, Validation) {
  std::vector<double> series(13, 1.0);
  EXPECT_THROW(fel::series_to_curves(series, 1, 1), fel::InvalidArgument);
  EXPECT_THROW(fel::series_to_curves(series, 12, 0), fel::InvalidArgument);
  EXPECT_THROW(fel::series_to_curves(series, 12, 1, 0), fel::InvalidArgument);
  EXPECT_THROW(fel::series_to_curves(series, 12, 2), fel::InsufficientData);
  EXPECT_NO_THROW(fel::series_to_curves(series, 12, 1));
}

TEST_F(TempDir, RoundTripPreservesEverything) {
  write("curves.csv",
        "id,0,0.5,1,y,z1,z2\n"
        "a,1.25,2.5,3.75,10.125,0.5,-1\n"
        "b,-0.1,0.2,-0.3,0.0625,1.5,2\n"
        "c,0.7771234567890123,1,2,3,4,5\n");
  const fel::io::CurveTable t = fel::io::load_curves(path("curves.csv"));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.ids[0], "a");
  EXPECT_EQ(t.grid->points(), (std::vector<double>{0.0, 0.5, 1.0}));
  ASSERT_TRUE(t.responses.has_value());
  EXPECT_DOUBLE_EQ((*t.responses)[0], 10.125);
  ASSERT_EQ(t.covariate_dim, 2u);
  EXPECT_DOUBLE_EQ(t.covariates[1], -1.0);
  EXPECT_DOUBLE_EQ(t.curves[2][0], 0.7771234567890123);

  fel::io::save_curves(path("out.csv"), t);
  const fel::io::CurveTable t2 = fel::io::load_curves(path("out.csv"));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(t.curves[i].values(), t2.curves[i].values());
    EXPECT_EQ((*t.responses)[i], (*t2.responses)[i]);
  }
  EXPECT_EQ(t.covariates, t2.covariates);

  // A second save is byte-identical.
  fel::io::save_curves(path("out2.csv"), t2);
  EXPECT_EQ(slurp("out.csv"), slurp("out2.csv"));
}

TEST_F(TempDir, HeaderlessFileGetsUnitGrid) {
  write("raw.csv",
        "s1,1,2,3,4\n"
        "s2,5,6,7,8\n");
  const fel::io::CurveTable t = fel::io::load_curves(path("raw.csv"));
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.grid->points(), (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
  EXPECT_FALSE(t.responses.has_value());
  EXPECT_EQ(t.covariate_dim, 0u);
  EXPECT_THROW(t.to_dataset(), fel::MissingColumn);
}

TEST_F(TempDir, RaggedRowNamesTheLine) {
  write("bad.csv",
        "id,0,1,y\n"
        "a,1,2,3\n"
        "b,1,2\n");
  try {
    fel::io::load_curves(path("bad.csv"));
    FAIL() << "expected ParseError";
  } catch (const fel::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST_F(TempDir, NonNumericCellNamesLineAndColumn) {
  write("bad.csv",
        "id,0,1,y\n"
        "a,1,oops,3\n");
  try {
    fel::io::load_curves(path("bad.csv"));
    FAIL() << "expected ParseError";
  } catch (const fel::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST_F(TempDir, HeaderValidation) {
  write("bad.csv", "id,0,1,y,w1\na,1,2,3,4\n");
  EXPECT_THROW(fel::io::load_curves(path("bad.csv")), fel::ParseError);
  write("bad2.csv", "id,0,1,y,z2\na,1,2,3,4\n");  // must start at z1
  EXPECT_THROW(fel::io::load_curves(path("bad2.csv")), fel::ParseError);
  write("bad3.csv", "id,0\na,1\n");  // fewer than 2 grid points
  EXPECT_THROW(fel::io::load_curves(path("bad3.csv")), fel::ParseError);
  write("empty.csv", "\n\n");
  EXPECT_THROW(fel::io::load_curves(path("empty.csv")), fel::InsufficientData);
}

TEST_F(TempDir, SeriesLoading) {
  write("series.txt",
        "# monthly values\n"
        "1.5 2.5\n"
        "3.5\n"
        "\n"
        "4.5 # trailing comment\n");
  const std::vector<double> s = fel::io::load_series(path("series.txt"));
  EXPECT_EQ(s, (std::vector<double>{1.5, 2.5, 3.5, 4.5}));
  write("bad.txt", "1.0\nnope\n");
  EXPECT_THROW(fel::io::load_series(path("bad.txt")), fel::ParseError);
  write("none.txt", "# nothing\n");
  EXPECT_THROW(fel::io::load_series(path("none.txt")), fel::InsufficientData);
}

TEST(CoverageReportText, StableSchema) {
  fel::SimConfig cfg;
  cfg.n = 30;
  cfg.n_test = 2;
  cfg.n_reps = 1;
  cfg.seed = 5;
  cfg.cv_candidates = 3;
  cfg.methods = {fel::Method::el, fel::Method::normal};
  // n >= 10 but small enough to stay fast.
  const fel::CoverageReport rep = fel::run_coverage_study(cfg);
  const std::string text = fel::io::coverage_report_text(rep);
  EXPECT_NE(text.find("fel-report-version: 1"), std::string::npos);
  EXPECT_NE(text.find("[config]"), std::string::npos);
  EXPECT_NE(text.find("[bandwidths]"), std::string::npos);
  EXPECT_NE(text.find("[method el]"), std::string::npos);
  EXPECT_NE(text.find("[method normal]"), std::string::npos);
  EXPECT_NE(text.find("coverage = "), std::string::npos);
  EXPECT_NE(text.find("avg_length = "), std::string::npos);
  EXPECT_NE(text.find("n_skipped = "), std::string::npos);
  EXPECT_NE(text.find("[records]"), std::string::npos);
}

}  // namespace
