#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cachescape/cache.hpp"

namespace cachescape {

// Set-associative, write-back, write-allocate cache with true LRU.
class SetAssocCache {
 public:
  explicit SetAssocCache(const CacheConfig& config);

  struct Outcome {
    bool hit = false;
    std::optional<std::uint64_t> writeback;  // byte address of a dirty victim line
  };

  Outcome access(std::uint64_t address, bool is_write);

  std::uint64_t line_base(std::uint64_t address) const {
    return (address >> line_shift_) << line_shift_;
  }

 private:
  std::uint32_t ways_;
  std::uint64_t set_mask_;
  unsigned line_shift_;
  std::vector<std::uint64_t> lines_;   // line number per way
  std::vector<std::uint64_t> stamps_;  // last-use time, 0 = invalid
  std::vector<std::uint8_t> dirty_;
  std::uint64_t clock_ = 0;
};

// How deep a demand access had to go.
enum class Depth : std::uint8_t { L1 = 0, L2 = 1, Memory = 2 };

// Functional state of the L1I/L1D/L2/memory hierarchy plus the access
// counters of SimStats. Timing is left to the caller.
class CacheHierarchy {
 public:
  explicit CacheHierarchy(const HierarchyConfig& config);

  Depth fetch(std::uint64_t pc);
  Depth data(std::uint64_t address, bool is_write);

  const HierarchyConfig& config() const { return config_; }
  // Counters only; total_cycles, idle_cycles and instructions_retired are
  // filled in by the timing model.
  const SimStats& stats() const { return stats_; }
  SimStats& stats() { return stats_; }

  // Cycles from the start of an access at L1 until it completes.
  std::uint64_t latency(Level l1, Depth depth) const;

 private:
  Depth access_l1(SetAssocCache& cache, LevelStats& stats, std::uint64_t address, bool is_write);
  Depth access_l2(std::uint64_t address, bool is_write);

  HierarchyConfig config_;
  SetAssocCache l1i_;
  SetAssocCache l1d_;
  SetAssocCache l2_;
  SimStats stats_;
};

}  // namespace cachescape
