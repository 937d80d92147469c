#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cachescape/dse.hpp"
#include "cachescape/error.hpp"
#include "cachescape/report_io.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace cachescape;

namespace {

std::vector<CachePoint> read_points(const std::string& text) {
  std::istringstream in(text);
  return read_points_csv(in);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("reals print in shortest round-trip form") {
  CHECK(format_real(0.0) == "0");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(-0.25) == "-0.25");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("points csv round-trip") {
  std::vector<CachePoint> pts(2);
  pts[0].workload = "a";
  pts[0].config = {16384, 65536};
  pts[0].cycles = 123;
  pts[0].energy.e_td = Energy::parse("1.5");
  pts[0].energy.e_t = Energy::parse("2.25");
  pts[1] = pts[0];
  pts[1].config = {32768, 65536};
  pts[1].cycles = 100;
  attach_metrics(pts, {32768, 65536});
  std::ostringstream out;
  write_points_csv(out, pts);
  CHECK(out.str().starts_with(std::string(kCachePointsHeader) + "\n"));
  const auto back = read_points(out.str());
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].workload == pts[i].workload);
    CHECK(back[i].config == pts[i].config);
    CHECK(back[i].cycles == pts[i].cycles);
    CHECK(back[i].energy.e_t == pts[i].energy.e_t);
    CHECK(back[i].energy.e_td == pts[i].energy.e_td);
    CHECK(back[i].energy.e_ts == pts[i].energy.e_t - pts[i].energy.e_td);
  }
}

TEST_CASE("points csv is strict") {
  const std::string header = std::string(kCachePointsHeader) + "\n";
  CHECK_NOTHROW(read_points(header + "a,16384,65536,10,2,1,0,0\n"));
  CHECK_THROWS_AS(read_points("workload,l1\n"), ParseError);
  CHECK_THROWS_AS(read_points(header + "a,16384,65536,10,2,1,0\n"), ParseError);
  CHECK_THROWS_AS(read_points(header + "a,16K,65536,10,2,1,0,0\n"), ParseError);
  CHECK_THROWS_AS(read_points(header + "a,16384,65536,10,1,2,0,0\n"), ParseError);
  CHECK_THROWS_AS(read_points(header + "a,16384,65536,10,2,1,0,0\na,16384,65536,10,2,1,0,0\n"), ParseError);
  CHECK_THROWS_AS(read_points(header + ",16384,65536,10,2,1,0,0\n"), ParseError);
  CHECK_THROWS_AS(read_points(header + "a,16384,65536,10,2,1,x,0\n"), ParseError);
}

TEST_CASE("simulation json matches the golden file") {
  const auto golden = testing::data_dir() / "fixtures" / "small_simulate.json";
  const std::string produced = testing::golden_simulation_json();
  if (std::getenv("CACHESCAPE_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(golden, std::ios::binary) << produced;
  }
  CHECK(slurp(golden) == produced);
}

TEST_CASE("dse summary") {
  std::ifstream in(testing::data_dir() / "fixtures" / "selection_points.csv");
  SweepGrid grid;
  for (std::uint64_t k : {8, 16, 32, 64, 128, 256}) grid.l1_sizes.push_back(k * 1024);
  for (std::uint64_t k : {16, 32, 64, 128, 256, 512}) grid.l2_sizes.push_back(k * 1024);
  validate(grid);
  const DseReport r = explore_cache(read_points_csv(in), grid, kDefaultCacheBaseline);
  const auto json = to_json(r);
  CHECK(json.at("chosen").at("l1") == 16384);
  CHECK(json.at("chosen").at("l2") == 65536);
  CHECK(json.at("overlap").at("candidates").size() == 12);
  CHECK(json.at("pruned").size() == 5);
  std::ostringstream out;
  print_dse_summary(out, json);
  CHECK(out.str().find("survivors: 5 (58% reduction in search space)") != std::string::npos);
  CHECK(out.str().find("chosen: (16K,64K)") != std::string::npos);

  std::ostringstream csv;
  write_candidates_csv(csv, r);
  std::size_t lines = 0;
  for (char c : csv.str()) lines += c == '\n';
  CHECK(lines == 13);
}
