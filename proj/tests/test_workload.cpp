#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "cachescape/cache.hpp"
#include "cachescape/error.hpp"
#include "cachescape/workload.hpp"

using namespace cachescape;

namespace {

std::string serialize(const Trace& t) {
  std::ostringstream out;
  write_trace(t, out);
  return out.str();
}

std::string validation_message(const WorkloadProfile& p) {
  try {
    validate(p);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("zero length is rejected by name") {
  WorkloadProfile p;
  p.length = 0;
  CHECK(validation_message(p).find("length") != std::string::npos);
  CHECK_THROWS_AS(generate_trace(p), ValidationError);
}

TEST_CASE("invalid fields are named") {
  WorkloadProfile p;
  p.load_fraction = 0.7;
  p.store_fraction = 0.4;
  CHECK(validation_message(p).find("store_fraction") != std::string::npos);

  p = {};
  p.load_fraction = -0.1;
  CHECK(validation_message(p).find("load_fraction") != std::string::npos);

  p = {};
  p.locality_alpha = 0.0;
  CHECK(validation_message(p).find("locality_alpha") != std::string::npos);

  p = {};
  p.data_working_set = 100;
  CHECK(validation_message(p).find("data_working_set") != std::string::npos);

  p = {};
  p.instr_working_set = 0;
  CHECK(validation_message(p).find("instr_working_set") != std::string::npos);
}

TEST_CASE("generation is deterministic") {
  WorkloadProfile p;
  p.length = 1000;
  p.seed = 42;
  CHECK(serialize(generate_trace(p)) == serialize(generate_trace(p)));
  WorkloadProfile q = p;
  q.seed = 43;
  CHECK(serialize(generate_trace(p)) != serialize(generate_trace(q)));
}

TEST_CASE("exact length and working-set bounds") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WorkloadProfile p;
    p.seed = seed;
    p.length = 20000;
    p.data_working_set = 4096 * seed;
    p.instr_working_set = 2048 * seed;
    p.locality_alpha = 0.5 * static_cast<double>(seed);
    const Trace t = generate_trace(p);
    REQUIRE(t.size() == p.length);
    for (const auto& r : t.records) {
      CHECK(r.thread_id == 0);
      CHECK(r.pc >= p.code_base);
      CHECK(r.pc < p.code_base + p.instr_working_set);
      if (r.mem) {
        CHECK(r.mem->address >= p.data_base);
        CHECK(r.mem->address < p.data_base + p.data_working_set);
      }
      CHECK(r.num_src_regs <= kMaxSrcRegs);
      CHECK(r.num_dst_regs <= kMaxDstRegs);
    }
  }
}

TEST_CASE("load and store fractions within two points") {
  const double mixes[][2] = {{0.25, 0.10}, {0.0, 0.5}, {0.6, 0.0}, {0.3, 0.3}, {0.05, 0.02}};
  std::uint64_t seed = 100;
  for (const auto& mix : mixes) {
    WorkloadProfile p;
    p.load_fraction = mix[0];
    p.store_fraction = mix[1];
    p.length = 20000;
    p.seed = ++seed;
    const Trace t = generate_trace(p);
    double loads = 0;
    double stores = 0;
    for (const auto& r : t.records) {
      if (!r.mem) continue;
      (r.mem->kind == MemKind::Load ? loads : stores) += 1;
    }
    CHECK(std::abs(loads / p.length - p.load_fraction) <= 0.02);
    CHECK(std::abs(stores / p.length - p.store_fraction) <= 0.02);
  }
}

TEST_CASE("4K data set with high locality misses rarely in a 4K L1D") {
  WorkloadProfile p;
  p.data_working_set = 4096;
  p.locality_alpha = 3.0;
  p.length = 100000;
  p.seed = 3;
  const Trace t = generate_trace(p);

  for (std::uint32_t assoc : {4u, 8u, 64u}) {
    HierarchyConfig h;
    h.l1d = {Level::L1D, 4096, 64, assoc, 1};
    const SimStats s = reference_simulate(h, t);
    const LevelStats& d = s.at(Level::L1D);
    const std::uint64_t compulsory = p.data_working_set / 64;
    const double ratio = static_cast<double>(d.n_miss - std::min(d.n_miss, compulsory)) /
                         static_cast<double>(d.n_read + d.n_write);
    CHECK(ratio < 0.05);
  }
}

TEST_CASE("higher alpha gives fewer misses") {
  auto misses = [](double alpha) {
    WorkloadProfile p;
    p.data_working_set = 64 * 1024;
    p.locality_alpha = alpha;
    p.length = 50000;
    HierarchyConfig h;
    h.l1d = {Level::L1D, 8 * 1024, 64, 4, 1};
    return simulate(h, generate_trace(p)).at(Level::L1D).n_miss;
  };
  CHECK(misses(2.5) < misses(1.0));
  CHECK(misses(1.0) < misses(0.3));
}

TEST_CASE("profile specs") {
  const WorkloadProfile p = parse_profile("name=w1,iws=8K,dws=24K,load=0.3,store=0.05,alpha=1.2,length=5000,seed=9");
  CHECK(p.name == "w1");
  CHECK(p.instr_working_set == 8192);
  CHECK(p.data_working_set == 24576);
  CHECK(p.load_fraction == 0.3);
  CHECK(p.store_fraction == 0.05);
  CHECK(p.locality_alpha == 1.2);
  CHECK(p.length == 5000);
  CHECK(p.seed == 9);

  CHECK_THROWS_AS(parse_profile("name=x,bogus=1"), ValidationError);
  CHECK_THROWS_AS(parse_profile("length=abc"), ValidationError);
  CHECK_THROWS_AS(parse_profile("length=0"), ValidationError);
}

TEST_CASE("sizes") {
  CHECK(parse_size("16K") == 16384);
  CHECK(parse_size("16KB") == 16384);
  CHECK(parse_size("2M") == 2 * 1024 * 1024);
  CHECK(parse_size("4096") == 4096);
  CHECK_THROWS_AS(parse_size("16Q"), ValidationError);
  CHECK_THROWS_AS(parse_size(""), ValidationError);
  CHECK(format_size(16384) == "16K");
  CHECK(format_size(1 << 20) == "1M");
  CHECK(format_size(100) == "100");
}
