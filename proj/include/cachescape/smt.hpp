#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cachescape/cache.hpp"
#include "cachescape/trace.hpp"

namespace cachescape {

// Every resource (L1I, L1D, L2, register file, front end) is shared by all
// threads; there is no partitioning knob.
struct CoreConfig {
  std::uint32_t fetch_width = 2;
  std::uint32_t regfile_size = 80;
  // Cycles a destination register stays allocated after its instruction's
  // memory accesses complete.
  std::uint32_t commit_latency = 16;
  std::uint32_t num_threads = 1;

  friend bool operator==(const CoreConfig&, const CoreConfig&) = default;
};

void validate(const CoreConfig& core);

struct ThreadStats {
  std::uint64_t instructions_retired = 0;
  // Cycle at which the thread's last instruction committed.
  std::uint64_t cycles_active = 0;

  friend bool operator==(const ThreadStats&, const ThreadStats&) = default;
};

struct SmtStats {
  std::vector<ThreadStats> per_thread;  // indexed by trace slot
  std::uint64_t total_cycles = 0;
  // Cycles in which at least one thread was ready but had no free register.
  std::uint64_t regfile_stall_cycles = 0;
  SimStats underlying;  // merged hierarchy counters

  friend bool operator==(const SmtStats&, const SmtStats&) = default;
};

/// Cycle-stepped SMT front end over a shared hierarchy and register file.
///
/// Each cycle up to fetch_width instructions issue, one per ready thread,
/// visiting threads round-robin from slot (cycle mod n). A thread is ready
/// once its previous instruction's memory accesses have completed. An
/// instruction with a destination needs a free physical register; without
/// one its thread stalls. The register is released commit_latency cycles
/// after the instruction's accesses complete.
///
/// L1 hits are pipelined. Misses are blocking: the hierarchy serves one miss
/// at a time, first come first served in issue order; instructions issued in
/// the same cycle reach the hierarchy in thread-slot order.
///
/// The run ends when the last instruction commits. Throws ContractError if
/// traces.size() != core.num_threads or a trace mixes thread ids.
SmtStats run_smt(const CoreConfig& core, const HierarchyConfig& hierarchy,
                 std::span<const Trace> traces);

// run_smt with exactly one trace. Requires core.num_threads == 1.
SmtStats run_single(const CoreConfig& core, const HierarchyConfig& hierarchy, const Trace& trace);

}  // namespace cachescape
