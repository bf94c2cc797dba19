#include <gtest/gtest.h>

#include <sstream>

#include "hypersc/io.hpp"

using namespace hypersc;
using io::json;

namespace {

json tangent_doc(json points, double kappa = 1.0) {
  return {{"model", "tangent"}, {"kappa", kappa}, {"dim", 2}, {"points", std::move(points)}};
}

std::string error_of(const json& doc) {
  try {
    io::parse_points(doc);
  } catch (const io::InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Io, FormatDoubleUsesSeventeenDigits) {
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(2.0), "2.0");
  EXPECT_EQ(io::format_double(1e-20), "9.9999999999999995e-21");
  EXPECT_EQ(io::format_double(std::nan("")), "null");
}

TEST(Io, TangentModelDistanceIsCoordinateNorm) {
  for (double kappa : {1.0, 4.0}) {
    const io::PointsFile pf = io::parse_points(tangent_doc({{3.0, 4.0}, {0.0, 0.0}}, kappa));
    ASSERT_EQ(pf.points.size(), 2u);
    EXPECT_NEAR(distance(pf.points[0], pf.points[1]), 5.0, 1e-12);
    EXPECT_EQ(pf.points[0].kappa(), kappa);
  }
}

TEST(Io, HyperboloidModelRoundTrip) {
  const io::PointsFile a = io::parse_points(tangent_doc({{0.3, -0.2}, {1.0, 0.5}}));
  const io::PointsFile b = io::parse_points(io::points_to_json(a));
  EXPECT_EQ(b.model, io::PointModel::Hyperboloid);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_LT((a.points[i].coords() - b.points[i].coords()).norm(), 1e-15);
  }
}

TEST(Io, ErrorsNameThePointIndex) {
  EXPECT_NE(error_of(tangent_doc({{0.0, 0.0}, {1.0}})).find("point 1"), std::string::npos);
  EXPECT_NE(error_of(tangent_doc({{0.0, 0.0}, {1.0, 2.0}, {1.0, "x"}})).find("point 2"), std::string::npos);
  json off_sheet = {{"model", "hyperboloid"}, {"kappa", 1.0}, {"dim", 2}, {"points", {{1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}}}};
  EXPECT_NE(error_of(off_sheet).find("point 1"), std::string::npos);
  EXPECT_NE(error_of({{"model", "poincare"}, {"kappa", 1}, {"dim", 2}, {"points", {{0, 0}}}}).find("unknown model"),
            std::string::npos);
  EXPECT_NE(error_of(tangent_doc({{0.0, 0.0}}, -1.0)).find("kappa"), std::string::npos);
  EXPECT_NE(error_of(json::array()).find("object"), std::string::npos);
  EXPECT_THROW(io::read_points("/nonexistent/points.json"), io::InputError);
}

TEST(Io, ResultRoundTrip) {
  MebInstance inst;
  inst.points = io::parse_points(tangent_doc({{1.0, 0.0}, {-1.0, 0.0}, {0.0, 0.7}})).points;
  inst.epsilon = 1e-6;
  const MebSolution sol = solve(inst);
  const io::ResultFile r = io::to_result(sol, {{"epsilon", 1e-6}});
  const std::string text = io::dump_json(io::result_to_json(r));
  const io::ResultFile back = io::result_from_json(json::parse(text));
  EXPECT_EQ(back.radius, r.radius);
  EXPECT_EQ(back.s, r.s);
  EXPECT_EQ(back.center, r.center);
  EXPECT_EQ(back.gap_certificate, r.gap_certificate);
  EXPECT_EQ(back.path_iterations, r.path_iterations);
  EXPECT_EQ(back.method, "path-following");
  EXPECT_NEAR(back.radius, std::sqrt(back.s), 1e-12);
  // Byte-identical re-serialization.
  EXPECT_EQ(io::dump_json(io::result_to_json(back)), text);
}

TEST(Io, TraceCsvLayout) {
  MebInstance inst;
  inst.points = io::parse_points(tangent_doc({{1.0, 0.0}, {-1.0, 0.2}})).points;
  inst.epsilon = 1e-3;
  const MebSolution sol = solve(inst);
  std::ostringstream os;
  io::write_trace_csv(os, sol.trace);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iter,phase,t,lambda,objective,gap_bound");
  int last_iter = -1;
  std::string last_phase;
  double last_gap = 1e300;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (line.back() == ',') cols.push_back("");
    ASSERT_EQ(cols.size(), 6u) << line;
    const int iter = std::stoi(cols[0]);
    if (cols[1] == last_phase) EXPECT_GT(iter, last_iter);
    if (cols[1] == "centering") {
      EXPECT_TRUE(cols[5].empty());
    } else {
      ASSERT_EQ(cols[1], "path");
      const double g = std::stod(cols[5]);
      EXPECT_LE(g, last_gap);
      last_gap = g;
    }
    last_iter = iter;
    last_phase = cols[1];
  }
  EXPECT_EQ(rows, static_cast<int>(sol.trace.size()));
  EXPECT_EQ(last_phase, "path");
}

TEST(Io, BundledInstanceMatchesGoldenOracle) {
  const io::PointsFile pf = io::read_points(HYPERSC_DATA_DIR "/five_points.json");
  const io::ResultFile golden = io::read_result(HYPERSC_DATA_DIR "/five_points_oracle.json");
  EXPECT_EQ(golden.method, "oracle");
  const MebSolution sol = solve(MebInstance{pf.points, pf.kappa, 1e-5});
  EXPECT_NEAR(sol.radius, golden.radius, 1e-3);
  EXPECT_LT(distance(sol.center, HPoint(golden.center, golden.kappa)), 1e-2);
}
