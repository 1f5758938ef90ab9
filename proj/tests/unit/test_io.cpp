#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "seqcp/io.hpp"
#include "seqcp/simgen.hpp"
#include "test_util.hpp"

using namespace seqcp;

namespace {

std::string parse_error(const std::string& text, const CsvReadOptions& opts = {}) {
  std::istringstream in(text);
  try {
    read_dataset_csv(in, opts);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    return e.what();
  }
  ADD_FAILURE() << "expected a parse error";
  return {};
}

}  // namespace

TEST(Csv, RoundTripIsBitExact) {
  Scenario s;
  s.family = Family::Poisson;
  s.T = 200;
  s.d = 4;
  const SimulatedData sim = simulate(s);
  std::ostringstream out;
  write_dataset_csv(out, sim.data);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "y,x1,x2,x3,x4");
  std::istringstream in(out.str());
  const CsvDataset back = read_dataset_csv(in);
  EXPECT_EQ(back.data.responses(), sim.data.responses());
  EXPECT_EQ(back.data.covariates(), sim.data.covariates());
  EXPECT_FALSE(back.has_weight);
  EXPECT_EQ(back.covariate_names, (std::vector<std::string>{"x1", "x2", "x3", "x4"}));
}

TEST(Csv, FormatDoubleRoundTrips) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(gen);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Csv, WeightsAndCrlf) {
  const std::string text = "\xEF\xBB\xBFy,a,weight\r\n1,2,0.5\r\n0,-1,2\r\n\r\n";
  std::istringstream in(text);
  const CsvDataset ds = read_dataset_csv(in);
  EXPECT_TRUE(ds.has_weight);
  EXPECT_EQ(ds.data.length(), 2);
  EXPECT_EQ(ds.data.dim(), 1);
  EXPECT_EQ(ds.data[0].w, 0.5);
  EXPECT_EQ(ds.data[1].x[0], -1.0);
  std::ostringstream out;
  write_dataset_csv(out, ds.data, ds.covariate_names);
  EXPECT_EQ(out.str(), "y,a,weight\n1,2,0.5\n0,-1,2\n");
}

TEST(Csv, ResponseOnly) {
  std::istringstream in("y\n0\n0\n10\n");
  const CsvDataset ds = read_dataset_csv(in);
  EXPECT_EQ(ds.data.dim(), 0);
  EXPECT_EQ(ds.data.length(), 3);
}

TEST(Csv, SortByColumnDescending) {
  std::istringstream in("y,x1,time\n1,10,1\n2,20,3\n3,30,2\n4,40,3\n");
  CsvReadOptions opts;
  opts.sort_by_column = "time";
  const CsvDataset ds = read_dataset_csv(in, opts);
  EXPECT_EQ(ds.data.dim(), 1);
  EXPECT_EQ(ds.covariate_names, std::vector<std::string>{"x1"});
  const std::vector<double> expect{2, 4, 3, 1};
  for (Index i = 0; i < 4; ++i) EXPECT_EQ(ds.data[i].y, expect[static_cast<std::size_t>(i)]);
  EXPECT_NE(parse_error("y,x1\n1,2\n", opts).find("time"), std::string::npos);
}

TEST(Csv, ErrorsNameTheLine) {
  EXPECT_NE(parse_error("y,x1\n1,2\n3,oops\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error("y,x1\n1,2\n3\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error("x1,y\n1,2\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error("").find("header"), std::string::npos);
  std::istringstream empty("y,x1\n");
  EXPECT_EQ(seqcp::testing::code_of([&] { read_dataset_csv(empty); }), ErrorCode::InvalidLength);
}
