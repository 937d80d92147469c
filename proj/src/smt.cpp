#include "cachescape/smt.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <utility>

#include "cachescape/cache_hierarchy.hpp"
#include "cachescape/error.hpp"

namespace cachescape {

void validate(const CoreConfig& core) {
  if (core.fetch_width < 1) throw ValidationError("fetch_width must be >= 1");
  if (core.regfile_size < core.fetch_width) {
    throw ValidationError("regfile_size must be >= fetch_width, got " +
                          std::to_string(core.regfile_size));
  }
  if (core.commit_latency < 1) throw ValidationError("commit_latency must be >= 1");
  if (core.num_threads < 1) throw ValidationError("num_threads must be >= 1");
}

namespace {

using Interval = std::pair<std::uint64_t, std::uint64_t>;  // [begin, end)

std::uint64_t union_length(std::vector<Interval>& intervals) {
  std::sort(intervals.begin(), intervals.end());
  std::uint64_t length = 0;
  std::uint64_t covered_to = 0;
  for (const auto& [begin, end] : intervals) {
    const std::uint64_t from = std::max(begin, covered_to);
    if (end > from) {
      length += end - from;
      covered_to = end;
    }
  }
  return length;
}

struct ThreadState {
  const Trace* trace = nullptr;
  std::size_t next = 0;
  std::uint64_t ready_at = 0;
  ThreadStats stats;

  bool done() const { return next >= trace->records.size(); }
};

class SmtCore {
 public:
  SmtCore(const CoreConfig& core, const HierarchyConfig& hierarchy) : core_(core), mem_(hierarchy) {}

  SmtStats run(std::span<const Trace> traces);

 private:
  // Returns the cycle at which the access completes.
  std::uint64_t access(Level l1, Depth depth, std::uint64_t start);
  void issue(ThreadState& thread, std::uint64_t cycle);

  CoreConfig core_;
  CacheHierarchy mem_;
  std::uint64_t free_regs_ = 0;
  std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> releases_;
  std::uint64_t miss_free_at_ = 0;
  std::uint64_t last_commit_ = 0;
  std::array<std::vector<Interval>, 3> busy_;
};

std::uint64_t SmtCore::access(Level l1, Depth depth, std::uint64_t start) {
  const HierarchyConfig& h = mem_.config();
  const std::uint64_t l1_done = start + h.at(l1).access_latency;
  std::uint64_t done = l1_done;
  if (depth != Depth::L1) {
    const std::uint64_t miss_start = std::max(l1_done, miss_free_at_);
    done = miss_start + mem_.latency(l1, depth) - h.at(l1).access_latency;
    miss_free_at_ = done;
    busy_[static_cast<std::size_t>(Level::L2)].emplace_back(miss_start, done);
  }
  busy_[static_cast<std::size_t>(l1)].emplace_back(start, done);
  return done;
}

void SmtCore::issue(ThreadState& thread, std::uint64_t cycle) {
  const TraceRecord& rec = thread.trace->records[thread.next++];
  std::uint64_t done = access(Level::L1I, mem_.fetch(rec.pc), cycle);
  if (rec.mem) {
    const Depth depth = mem_.data(rec.mem->address, rec.mem->kind == MemKind::Store);
    done = access(Level::L1D, depth, done);
  }
  const std::uint64_t commit = done + core_.commit_latency;
  for (unsigned r = 0; r < rec.num_dst_regs; ++r) releases_.push(commit);
  thread.ready_at = done;
  thread.stats.instructions_retired += 1;
  thread.stats.cycles_active = commit;
  last_commit_ = std::max(last_commit_, commit);
}

SmtStats SmtCore::run(std::span<const Trace> traces) {
  const std::size_t n = traces.size();
  std::vector<ThreadState> threads(n);
  for (std::size_t t = 0; t < n; ++t) threads[t].trace = &traces[t];
  free_regs_ = core_.regfile_size;

  SmtStats out;
  std::vector<std::size_t> issued;
  std::vector<bool> reg_blocked(n);
  std::uint64_t cycle = 0;
  const auto active = [&] {
    return std::any_of(threads.begin(), threads.end(), [](const auto& t) { return !t.done(); });
  };

  while (active()) {
    while (!releases_.empty() && releases_.top() <= cycle) {
      releases_.pop();
      ++free_regs_;
    }

    issued.clear();
    std::fill(reg_blocked.begin(), reg_blocked.end(), false);
    std::uint32_t slots = core_.fetch_width;
    const std::size_t first = static_cast<std::size_t>(cycle % n);
    for (std::size_t k = 0; k < n && slots > 0; ++k) {
      const std::size_t t = (first + k) % n;
      ThreadState& thread = threads[t];
      if (thread.done() || thread.ready_at > cycle) continue;
      const std::uint8_t need = thread.trace->records[thread.next].num_dst_regs;
      if (need > free_regs_) {
        reg_blocked[t] = true;
        continue;
      }
      free_regs_ -= need;
      issued.push_back(t);
      --slots;
    }
    // Same-cycle requests reach the hierarchy in thread-slot order.
    std::sort(issued.begin(), issued.end());
    for (std::size_t t : issued) issue(threads[t], cycle);

    // Jump to the next cycle in which anything can change.
    constexpr auto kNever = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t next = kNever;
    bool any_blocked = false;
    for (std::size_t t = 0; t < n; ++t) {
      const ThreadState& thread = threads[t];
      if (thread.done()) continue;
      if (thread.ready_at > cycle) {
        next = std::min(next, thread.ready_at);
      } else if (reg_blocked[t]) {
        any_blocked = true;
        next = std::min(next, releases_.top());
      } else {
        next = cycle + 1;  // ready but out of fetch slots
      }
    }
    if (any_blocked) out.regfile_stall_cycles += next - cycle;
    if (next == kNever) break;
    cycle = next;
  }

  out.total_cycles = last_commit_;
  out.per_thread.reserve(n);
  for (const auto& thread : threads) out.per_thread.push_back(thread.stats);
  out.underlying = mem_.stats();
  out.underlying.total_cycles = out.total_cycles;
  out.underlying.instructions_retired = 0;
  for (const auto& thread : threads) {
    out.underlying.instructions_retired += thread.stats.instructions_retired;
  }
  for (Level level : kLevels) {
    const auto i = static_cast<std::size_t>(level);
    out.underlying.at(level).idle_cycles = out.total_cycles - union_length(busy_[i]);
  }
  return out;
}

}  // namespace

SmtStats run_smt(const CoreConfig& core, const HierarchyConfig& hierarchy,
                 std::span<const Trace> traces) {
  validate(core);
  validate(hierarchy);
  if (traces.size() != core.num_threads) {
    throw ContractError("run_smt: " + std::to_string(traces.size()) + " traces for " +
                        std::to_string(core.num_threads) + " threads");
  }
  for (const auto& trace : traces) {
    if (!is_single_thread(trace)) {
      throw ContractError("run_smt: trace '" + trace.name + "' mixes thread ids");
    }
  }
  return SmtCore(core, hierarchy).run(traces);
}

SmtStats run_single(const CoreConfig& core, const HierarchyConfig& hierarchy, const Trace& trace) {
  if (core.num_threads != 1) throw ContractError("run_single: core.num_threads must be 1");
  return run_smt(core, hierarchy, std::span<const Trace>(&trace, 1));
}

}  // namespace cachescape
