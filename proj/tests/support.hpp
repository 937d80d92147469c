// Randomized inputs shared by the property tests.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "cachescape/cache.hpp"
#include "cachescape/energy.hpp"
#include "cachescape/trace.hpp"

namespace cachescape::testing {

inline std::filesystem::path data_dir() { return CACHESCAPE_DATA_DIR; }

inline std::uint64_t pick_pow2(std::mt19937_64& rng, unsigned lo_log2, unsigned hi_log2) {
  return std::uint64_t{1} << std::uniform_int_distribution<unsigned>(lo_log2, hi_log2)(rng);
}

// Small caches so that short traces exercise evictions at every level.
inline CacheConfig random_cache(std::mt19937_64& rng, Level level, std::uint64_t line) {
  CacheConfig c;
  c.level = level;
  c.line_size = line;
  c.associativity = static_cast<std::uint32_t>(pick_pow2(rng, 0, 3));
  const std::uint64_t sets = pick_pow2(rng, 0, 5);
  c.size = sets * c.associativity * line;
  c.access_latency = std::uniform_int_distribution<std::uint32_t>(1, 8)(rng);
  return c;
}

inline HierarchyConfig random_hierarchy(std::mt19937_64& rng) {
  HierarchyConfig h;
  h.l1i = random_cache(rng, Level::L1I, pick_pow2(rng, 4, 6));
  h.l1d = random_cache(rng, Level::L1D, pick_pow2(rng, 4, 6));
  const std::uint64_t l2_line = std::max(h.l1i.line_size, h.l1d.line_size) << (rng() % 2);
  h.l2 = random_cache(rng, Level::L2, l2_line);
  h.mem_latency = std::uniform_int_distribution<std::uint32_t>(1, 100)(rng);
  return h;
}

// Addresses are drawn from a few hot regions plus unaligned noise so that
// sets collide, lines straddle, and stores dirty lines that later get evicted.
inline Trace random_trace(std::mt19937_64& rng, std::size_t length) {
  Trace t;
  t.name = "random";
  t.records.reserve(length);
  const std::uint64_t code_span = pick_pow2(rng, 6, 13);
  const std::uint64_t data_span = pick_pow2(rng, 6, 15);
  const double mem_p = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
  const double store_p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t pc = 0x1000;
  for (std::size_t i = 0; i < length; ++i) {
    TraceRecord r;
    pc = unit(rng) < 0.8 ? pc + 4 : 0x1000 + (rng() % code_span);
    r.pc = pc;
    if (unit(rng) < mem_p) {
      const std::uint64_t addr = (unit(rng) < 0.05 ? rng() : 0x80000 + rng() % data_span);
      r.mem = MemOp{unit(rng) < store_p ? MemKind::Store : MemKind::Load, addr};
    }
    r.num_src_regs = static_cast<std::uint8_t>(rng() % (kMaxSrcRegs + 1));
    r.num_dst_regs = static_cast<std::uint8_t>(rng() % (kMaxDstRegs + 1));
    t.records.push_back(r);
  }
  return t;
}

inline SimStats random_stats(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> count(0, 1'000'000);
  SimStats s;
  for (auto& l : s.levels) {
    l.n_read = count(rng);
    l.n_write = count(rng);
    l.n_miss = count(rng) % (l.n_read + l.n_write + 1);
    l.n_hit = l.n_read + l.n_write - l.n_miss;
    l.idle_cycles = count(rng);
  }
  s.at(Level::L1I).n_write = 0;
  s.mem_reads = count(rng);
  s.mem_writes = count(rng);
  s.total_cycles = count(rng) * 4;
  return s;
}

// Energies with up to nine fractional digits, so exact arithmetic is exercised.
inline Energy random_energy(std::mt19937_64& rng) {
  return Energy::from_nano(static_cast<__int128>(rng() % 50'000'000'000ULL));
}

inline EnergyTable random_table(std::mt19937_64& rng, const HierarchyConfig& h) {
  EnergyTable table;
  for (Level level : kLevels) {
    const CacheConfig& c = h.at(level);
    table.add(EnergyKey{level, c.size, c.associativity, c.line_size},
              EnergyParams{random_energy(rng), random_energy(rng), random_energy(rng), c.access_latency});
  }
  table.set_memory(EnergyParams{random_energy(rng), random_energy(rng), Energy{}, h.mem_latency});
  return table;
}

}  // namespace cachescape::testing
