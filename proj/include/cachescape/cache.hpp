#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "cachescape/trace.hpp"

namespace cachescape {

enum class Level : std::uint8_t { L1I = 0, L1D = 1, L2 = 2 };

inline constexpr std::array<Level, 3> kLevels = {Level::L1I, Level::L1D, Level::L2};

std::string_view to_string(Level level);
// Throws ParseError(0, ...) on an unknown name.
Level parse_level(std::string_view name);

struct CacheConfig {
  Level level = Level::L1D;
  std::uint64_t size = 32 * 1024;
  std::uint64_t line_size = 64;
  std::uint32_t associativity = 4;
  std::uint32_t access_latency = 1;

  std::uint64_t num_sets() const { return size / (line_size * associativity); }

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

// L1I and L1D are private first levels; L2 is unified behind both.
struct HierarchyConfig {
  CacheConfig l1i{Level::L1I, 32 * 1024, 64, 4, 1};
  CacheConfig l1d{Level::L1D, 32 * 1024, 64, 4, 1};
  CacheConfig l2{Level::L2, 64 * 1024, 64, 8, 6};
  std::uint32_t mem_latency = 40;

  const CacheConfig& at(Level level) const;

  friend bool operator==(const HierarchyConfig&, const HierarchyConfig&) = default;
};

void validate(const CacheConfig& config);
void validate(const HierarchyConfig& config);

struct LevelStats {
  std::uint64_t n_read = 0;
  std::uint64_t n_write = 0;
  std::uint64_t n_hit = 0;
  std::uint64_t n_miss = 0;
  std::uint64_t idle_cycles = 0;
  // Flow bookkeeping: lines allocated on a miss and dirty victims written
  // back to the next level.
  std::uint64_t fills = 0;
  std::uint64_t dirty_evictions = 0;

  friend bool operator==(const LevelStats&, const LevelStats&) = default;
};

struct SimStats {
  std::array<LevelStats, 3> levels{};
  std::uint64_t mem_reads = 0;
  std::uint64_t mem_writes = 0;
  std::uint64_t total_cycles = 0;
  std::uint64_t instructions_retired = 0;

  LevelStats& at(Level level) { return levels[static_cast<std::size_t>(level)]; }
  const LevelStats& at(Level level) const { return levels[static_cast<std::size_t>(level)]; }

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Functional and timing simulation of a single-thread trace.
///
/// Policies: write-back, write-allocate, strict LRU, no inclusion. An L1 miss
/// first reads the line from L2, then writes the dirty victim (if any) back to
/// L2; an L2 miss reads from memory and writes a dirty L2 victim to memory.
///
/// Timing: each record costs 1 cycle plus the serialized latency of its L1I
/// fetch and, if present, its L1D access. An access that hits L1 costs the L1
/// latency; one that hits L2 adds the L2 latency; one that reaches memory adds
/// the memory latency too. Write-backs are buffered and cost no cycles.
///
/// A level is busy for its own latency plus any wait on the levels below
/// while it services a demand access; idle_cycles = total_cycles - busy.
///
/// Throws ContractError if any record has a thread id other than 0.
SimStats simulate(const HierarchyConfig& hierarchy, const Trace& trace);

// Slow list-based re-implementation of simulate() used as a test oracle.
SimStats reference_simulate(const HierarchyConfig& hierarchy, const Trace& trace);

}  // namespace cachescape
