#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "corrkit/csv.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/panel.hpp"
#include "doctest.h"

using namespace corrkit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "corrkit_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ReturnPanel small_panel() {
  ReturnPanel p;
  p.period_seconds = 86400;
  p.timestamps = {86400, 172800, 259200, 345600};
  p.assets = {"aaa", "bbb"};
  p.returns.resize(4, 2);
  p.returns << 0.25, -0.5, 0.1, 0.1, -0.125, 0.75, 0.0625, -0.25;
  return p;
}

}  // namespace

TEST_CASE("numeric csv round trip with representable values") {
  const fs::path path = temp_file("roundtrip.csv");
  Eigen::MatrixXd m(2, 3);
  m << 0.25, -1.5, 3.75, 0.0625, 100.5, -0.125;
  write_csv(path.string(), {"a", "b", "c"}, m);
  const CsvTable t = read_numeric_csv(path.string());
  REQUIRE(t.header.size() == 3);
  CHECK(t.header[0] == "a");
  REQUIRE(t.cells.size() == 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) {
      REQUIRE(t.cells[r][c].has_value());
      CHECK(*t.cells[r][c] == m(r, c));
    }
}

TEST_CASE("blank cells become empty optionals, junk cells throw") {
  const fs::path path = temp_file("blanks.csv");
  write_text(path, "x,y\n1.5,\n,2.5\n");
  const CsvTable t = read_numeric_csv(path.string());
  CHECK(t.cells[0][0].has_value());
  CHECK(!t.cells[0][1].has_value());
  CHECK(!t.cells[1][0].has_value());

  write_text(path, "x,y\n1.5,oops\n");
  CHECK_THROWS_AS(read_numeric_csv(path.string()), ValidationError);
  CHECK_THROWS_AS(read_numeric_csv("/nonexistent/nowhere.csv"), ValidationError);
}

TEST_CASE("format_double is locale-free and stable") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(-3.0) == "-3");
  CHECK(format_double(1e-12) == "1e-12");
}

TEST_CASE("return panel writes and reloads identically") {
  const ReturnPanel p = small_panel();
  const fs::path path = temp_file("panel.csv");
  write_return_panel(p, path.string());
  const ReturnPanel q = load_return_panel(path.string(), MissingPolicy::zero_fill);
  CHECK(q.period_seconds == p.period_seconds);
  CHECK(q.assets == p.assets);
  CHECK(q.timestamps == p.timestamps);
  CHECK((q.returns - p.returns).cwiseAbs().maxCoeff() == 0.0);

  // byte determinism of the writer
  const std::string first = read_text(path);
  write_return_panel(p, path.string());
  CHECK(read_text(path) == first);
}

TEST_CASE("drop_asset removes gappy columns, zero_fill keeps them") {
  const fs::path path = temp_file("gappy.csv");
  // asset b is blank in 2/4 rows (50% > 10%); a and c are complete
  write_text(path,
             "timestamp,a,b,c\n"
             "86400,0.01,,0.02\n"
             "172800,0.02,0.01,0.01\n"
             "259200,-0.01,,0.03\n"
             "345600,0.03,0.02,0.01\n");
  const ReturnPanel dropped = load_return_panel(path.string(), MissingPolicy::drop_asset);
  REQUIRE(dropped.assets.size() == 2);
  CHECK(dropped.assets[0] == "a");
  CHECK(dropped.assets[1] == "c");

  const ReturnPanel zeroed = load_return_panel(path.string(), MissingPolicy::zero_fill);
  REQUIRE(zeroed.assets.size() == 3);
  CHECK(zeroed.returns(0, 1) == 0.0);
  CHECK(zeroed.returns(2, 1) == 0.0);
  CHECK(zeroed.returns(0, 2) == doctest::Approx(0.02));

  // dropping below two assets is fatal: a panel of one column cannot correlate
  write_text(path,
             "timestamp,a,b\n"
             "86400,0.01,\n"
             "172800,0.02,0.01\n"
             "259200,-0.01,\n");
  CHECK_THROWS_AS(load_return_panel(path.string(), MissingPolicy::drop_asset), ValidationError);
}

TEST_CASE("panel validation rejects malformed inputs") {
  ReturnPanel p = small_panel();
  CHECK_NOTHROW(p.validate());

  ReturnPanel bad_spacing = small_panel();
  bad_spacing.timestamps[2] = 260000;
  CHECK_THROWS_AS(bad_spacing.validate(), ValidationError);

  ReturnPanel nan_cell = small_panel();
  nan_cell.returns(1, 1) = std::nan("");
  CHECK_THROWS_AS(nan_cell.validate(), ValidationError);

  ReturnPanel one_asset = small_panel();
  one_asset.assets = {"aaa"};
  one_asset.returns = one_asset.returns.leftCols(1).eval();
  CHECK_THROWS_AS(one_asset.validate(), ValidationError);
}

TEST_CASE("criterion panel loads and validates") {
  const fs::path path = temp_file("caps.csv");
  write_text(path,
             "date,a,b,c\n"
             "86400,10,20,30\n"
             "172800,11,19,31\n");
  const CriterionPanel crit = load_criteria(path.string());
  CHECK(crit.name == "caps");
  REQUIRE(crit.values.rows() == 2);
  CHECK(crit.values(1, 2) == doctest::Approx(31.0));
  CHECK_NOTHROW(crit.validate());

  CriterionPanel flat = crit;
  flat.values.row(0).setConstant(5.0);
  CHECK_THROWS_AS(flat.validate(), ValidationError);
}

TEST_CASE("aggregation compounds blocks and drops the remainder") {
  ReturnPanel p = small_panel();
  const ReturnPanel agg = aggregate_returns(p, 2);
  REQUIRE(agg.n_periods() == 2);
  CHECK(agg.period_seconds == 172800);
  CHECK(agg.timestamps[0] == 172800);
  CHECK(agg.timestamps[1] == 345600);
  // (1+0.25)(1+0.1)-1 = 0.375; (1-0.5)(1+0.1)-1 = -0.45
  CHECK(agg.returns(0, 0) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(agg.returns(0, 1) == doctest::Approx(-0.45).epsilon(1e-14));

  // 0.1 twice compounds to 0.21 exactly
  ReturnPanel flat = small_panel();
  flat.returns.setConstant(0.1);
  CHECK(aggregate_returns(flat, 2).returns(0, 0) == doctest::Approx(0.21).epsilon(1e-14));

  // remainder dropped: 7 rows at m=3 -> 2 rows (the 7th row is discarded)
  ReturnPanel seven = small_panel();
  seven.timestamps = {86400, 172800, 259200, 345600, 432000, 518400, 604800};
  seven.returns.resize(7, 2);
  seven.returns.setConstant(0.1);
  const ReturnPanel agg3 = aggregate_returns(seven, 3);
  CHECK(agg3.n_periods() == 2);
  CHECK(agg3.returns(1, 0) == doctest::Approx(0.331).epsilon(1e-14));

  // aggregating so far that fewer than 2 rows remain is fatal
  CHECK_THROWS_AS(aggregate_returns(p, 3), ValidationError);
  CHECK_THROWS_AS(aggregate_returns(p, 0), ValidationError);
}
