#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cachescape/cache.hpp"
#include "cachescape/cache_hierarchy.hpp"
#include "cachescape/error.hpp"
#include "support.hpp"

using namespace cachescape;

namespace {

TraceRecord fetch(std::uint64_t pc) { return TraceRecord{0, pc, std::nullopt, 0, 0}; }

TraceRecord load(std::uint64_t pc, std::uint64_t addr) {
  return TraceRecord{0, pc, MemOp{MemKind::Load, addr}, 1, 1};
}

TraceRecord store(std::uint64_t pc, std::uint64_t addr) {
  return TraceRecord{0, pc, MemOp{MemKind::Store, addr}, 2, 0};
}

void check_invariants(const HierarchyConfig& h, const Trace& t, const SimStats& s) {
  CHECK(s.instructions_retired == t.size());
  for (Level level : kLevels) {
    const LevelStats& l = s.at(level);
    CHECK(l.n_hit + l.n_miss == l.n_read + l.n_write);
    CHECK(l.idle_cycles <= s.total_cycles);
    CHECK(l.fills == l.n_miss);
  }
  const LevelStats& i = s.at(Level::L1I);
  const LevelStats& d = s.at(Level::L1D);
  const LevelStats& l2 = s.at(Level::L2);
  CHECK(i.n_read == t.size());
  CHECK(i.n_write == 0);
  CHECK(i.dirty_evictions == 0);
  CHECK(l2.n_read == i.n_miss + d.n_miss);
  CHECK(l2.n_write == d.dirty_evictions);
  CHECK(s.mem_reads == l2.n_miss);
  CHECK(s.mem_writes == l2.dirty_evictions);
  (void)h;
}

}  // namespace

TEST_CASE("empty trace") {
  const SimStats s = simulate(HierarchyConfig{}, Trace{});
  CHECK(s == SimStats{});
  CHECK(reference_simulate(HierarchyConfig{}, Trace{}) == SimStats{});
}

TEST_CASE("three fetches from one line") {
  HierarchyConfig h;  // L1I latency 1, L2 6, memory 40
  const Trace t{"t", {fetch(0x400000), fetch(0x400004), fetch(0x400008)}};
  const SimStats s = simulate(h, t);
  CHECK(s.at(Level::L1I).n_miss == 1);
  CHECK(s.at(Level::L1I).n_hit == 2);
  CHECK(s.at(Level::L1D) == LevelStats{0, 0, 0, 0, s.total_cycles, 0, 0});
  CHECK(s.total_cycles == (1 + 1 + 6 + 40) + (1 + 1) + (1 + 1));
  CHECK(s.at(Level::L1I).idle_cycles == 52 - (47 + 1 + 1));
  CHECK(s.at(Level::L2).idle_cycles == 52 - 46);
  CHECK(s.mem_reads == 1);
  CHECK(reference_simulate(h, t) == s);
}

TEST_CASE("direct-mapped two-set indexing") {
  HierarchyConfig h;
  h.l1d = {Level::L1D, 32, 16, 1, 1};
  const Trace t{"t", {load(0x400000, 0x00), load(0x400004, 0x10), load(0x400008, 0x00)}};
  const SimStats s = simulate(h, t);
  CHECK(s.at(Level::L1D).n_miss == 2);
  CHECK(s.at(Level::L1D).n_hit == 1);
  CHECK(reference_simulate(h, t) == s);
}

TEST_CASE("direct-mapped conflict evicts") {
  HierarchyConfig h;
  h.l1d = {Level::L1D, 32, 16, 1, 1};
  const Trace t{"t", {load(0x400000, 0x00), load(0x400004, 0x20), load(0x400008, 0x00)}};
  CHECK(simulate(h, t).at(Level::L1D).n_miss == 3);
}

TEST_CASE("strict LRU within a set") {
  SetAssocCache c(CacheConfig{Level::L1D, 128, 64, 2, 1});
  CHECK_FALSE(c.access(0x000, false).hit);
  CHECK_FALSE(c.access(0x040, false).hit);
  CHECK(c.access(0x000, false).hit);
  CHECK_FALSE(c.access(0x080, false).hit);  // evicts 0x040
  CHECK(c.access(0x000, false).hit);
  CHECK_FALSE(c.access(0x040, false).hit);  // evicts 0x080
  CHECK_FALSE(c.access(0x080, false).hit);
}

TEST_CASE("dirty victims are written back") {
  SetAssocCache c(CacheConfig{Level::L1D, 64, 64, 1, 1});
  CHECK_FALSE(c.access(0x13, true).writeback.has_value());
  const auto out = c.access(0x100, false);
  REQUIRE(out.writeback.has_value());
  CHECK(*out.writeback == 0x00);
  CHECK_FALSE(c.access(0x200, false).writeback.has_value());
}

TEST_CASE("write-back traffic reaches L2 and memory") {
  HierarchyConfig h;
  h.l1d = {Level::L1D, 64, 64, 1, 1};
  h.l2 = {Level::L2, 64, 64, 1, 6};
  const Trace t{"t", {store(0x400000, 0x1000), load(0x400004, 0x2000), load(0x400008, 0x3000)}};
  const SimStats s = simulate(h, t);
  CHECK(s.at(Level::L1D).dirty_evictions == 1);
  CHECK(s.at(Level::L2).n_write == 1);
  CHECK(s.at(Level::L2).dirty_evictions >= 1);
  CHECK(reference_simulate(h, t) == s);
  check_invariants(h, t, s);
}

TEST_CASE("nonzero thread id is a contract error") {
  Trace t{"t", {fetch(0x400000)}};
  t.records[0].thread_id = 1;
  CHECK_THROWS_AS(simulate(HierarchyConfig{}, t), ContractError);
  CHECK_THROWS_AS(reference_simulate(HierarchyConfig{}, t), ContractError);
}

TEST_CASE("invalid hierarchies") {
  HierarchyConfig h;
  h.l1d.size = 3000;
  CHECK_THROWS_AS(simulate(h, Trace{}), ValidationError);
  h = {};
  h.l1d.associativity = 3;
  CHECK_THROWS_AS(simulate(h, Trace{}), ValidationError);
  h = {};
  h.l2.line_size = 32;
  CHECK_THROWS_AS(simulate(h, Trace{}), ValidationError);
  h = {};
  h.l1i.access_latency = 0;
  CHECK_THROWS_AS(simulate(h, Trace{}), ValidationError);
  h = {};
  h.mem_latency = 0;
  CHECK_THROWS_AS(simulate(h, Trace{}), ValidationError);
  h = {};
  h.l1i.level = Level::L2;
  CHECK_THROWS_AS(simulate(h, Trace{}), ValidationError);
}

TEST_CASE("oracle equivalence and counter identities on random inputs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 150; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const Trace t = testing::random_trace(rng, 1 + rng() % 800);
    const SimStats s = simulate(h, t);
    REQUIRE(s == reference_simulate(h, t));
    check_invariants(h, t, s);
  }
}

TEST_CASE("doubling associativity never adds misses") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 60; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const Trace t = testing::random_trace(rng, 1000);
    const SimStats base = simulate(h, t);
    for (Level level : kLevels) {
      HierarchyConfig wider = h;
      CacheConfig& c = level == Level::L1I ? wider.l1i : level == Level::L1D ? wider.l1d : wider.l2;
      c.associativity *= 2;
      c.size *= 2;
      CHECK(simulate(wider, t).at(level).n_miss <= base.at(level).n_miss);
    }
  }
}

TEST_CASE("raising a latency never lowers total cycles") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 60; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const Trace t = testing::random_trace(rng, 500);
    const std::uint64_t base = simulate(h, t).total_cycles;
    for (int which = 0; which < 4; ++which) {
      HierarchyConfig slower = h;
      const std::uint32_t bump = 1 + static_cast<std::uint32_t>(rng() % 10);
      if (which == 0) slower.l1i.access_latency += bump;
      if (which == 1) slower.l1d.access_latency += bump;
      if (which == 2) slower.l2.access_latency += bump;
      if (which == 3) slower.mem_latency += bump;
      CHECK(simulate(slower, t).total_cycles >= base);
    }
  }
}

TEST_CASE("repeated runs agree") {
  std::mt19937_64 rng(14);
  const HierarchyConfig h = testing::random_hierarchy(rng);
  const Trace t = testing::random_trace(rng, 2000);
  CHECK(simulate(h, t) == simulate(h, t));
}

TEST_CASE("level names") {
  for (Level level : kLevels) CHECK(parse_level(to_string(level)) == level);
  CHECK_THROWS_AS(parse_level("L3"), ParseError);
}
