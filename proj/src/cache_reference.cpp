// Deliberately naive second implementation of simulate(): explicit per-set
// recency lists, no bit tricks, no shared code with the fast path.

#include <list>
#include <map>
#include <vector>

#include "cachescape/cache.hpp"
#include "cachescape/error.hpp"

namespace cachescape {

namespace {

struct RefLine {
  std::uint64_t tag_line;  // address / line_size
  bool dirty;
};

struct RefCache {
  explicit RefCache(const CacheConfig& c)
      : line_size(c.line_size), ways(c.associativity), sets(c.num_sets()) {}

  std::uint64_t line_size;
  std::uint64_t ways;
  std::uint64_t sets;
  std::map<std::uint64_t, std::list<RefLine>> recency;  // set -> MRU first

  struct Result {
    bool hit;
    bool dirty_victim;
    std::uint64_t victim_address;
  };

  Result touch(std::uint64_t address, bool write) {
    const std::uint64_t line = address / line_size;
    std::list<RefLine>& set = recency[line % sets];
    for (auto it = set.begin(); it != set.end(); ++it) {
      if (it->tag_line == line) {
        RefLine found = *it;
        set.erase(it);
        if (write) found.dirty = true;
        set.push_front(found);
        return {true, false, 0};
      }
    }
    Result r{false, false, 0};
    if (set.size() == ways) {
      const RefLine lru = set.back();
      set.pop_back();
      if (lru.dirty) {
        r.dirty_victim = true;
        r.victim_address = lru.tag_line * line_size;
      }
    }
    set.push_front(RefLine{line, write});
    return r;
  }
};

struct RefMachine {
  explicit RefMachine(const HierarchyConfig& h) : h(h), l1i(h.l1i), l1d(h.l1d), l2(h.l2) {}

  const HierarchyConfig& h;
  RefCache l1i;
  RefCache l1d;
  RefCache l2;
  SimStats s;

  // Returns 1 for an L2 hit, 2 for a memory access.
  int l2_access(std::uint64_t address, bool write) {
    LevelStats& st = s.levels[2];
    if (write) {
      st.n_write += 1;
    } else {
      st.n_read += 1;
    }
    RefCache::Result r = l2.touch(address, write);
    if (r.hit) {
      st.n_hit += 1;
      return 1;
    }
    st.n_miss += 1;
    st.fills += 1;
    s.mem_reads += 1;
    if (r.dirty_victim) {
      st.dirty_evictions += 1;
      s.mem_writes += 1;
    }
    return 2;
  }

  // Returns 0 for an L1 hit, otherwise the depth reached below it.
  int l1_access(RefCache& cache, LevelStats& st, std::uint64_t address, bool write) {
    if (write) {
      st.n_write += 1;
    } else {
      st.n_read += 1;
    }
    RefCache::Result r = cache.touch(address, write);
    if (r.hit) {
      st.n_hit += 1;
      return 0;
    }
    st.n_miss += 1;
    st.fills += 1;
    const std::uint64_t line_address = (address / cache.line_size) * cache.line_size;
    const int depth = l2_access(line_address, false);
    if (r.dirty_victim) {
      st.dirty_evictions += 1;
      l2_access(r.victim_address, true);
    }
    return depth;
  }
};

}  // namespace

SimStats reference_simulate(const HierarchyConfig& hierarchy, const Trace& trace) {
  validate(hierarchy);
  RefMachine m(hierarchy);
  std::uint64_t total = 0;
  std::uint64_t busy_l1i = 0;
  std::uint64_t busy_l1d = 0;
  std::uint64_t busy_l2 = 0;

  for (const TraceRecord& rec : trace.records) {
    if (rec.thread_id != 0) throw ContractError("reference_simulate: multi-thread trace");
    total += 1;

    int depth = m.l1_access(m.l1i, m.s.levels[0], rec.pc, false);
    std::uint64_t below = 0;
    if (depth >= 1) below += hierarchy.l2.access_latency;
    if (depth == 2) below += hierarchy.mem_latency;
    total += hierarchy.l1i.access_latency + below;
    busy_l1i += hierarchy.l1i.access_latency + below;
    busy_l2 += below;

    if (rec.mem.has_value()) {
      const bool write = rec.mem->kind == MemKind::Store;
      depth = m.l1_access(m.l1d, m.s.levels[1], rec.mem->address, write);
      below = 0;
      if (depth >= 1) below += hierarchy.l2.access_latency;
      if (depth == 2) below += hierarchy.mem_latency;
      total += hierarchy.l1d.access_latency + below;
      busy_l1d += hierarchy.l1d.access_latency + below;
      busy_l2 += below;
    }
  }

  m.s.total_cycles = total;
  m.s.instructions_retired = trace.records.size();
  m.s.levels[0].idle_cycles = total - busy_l1i;
  m.s.levels[1].idle_cycles = total - busy_l1d;
  m.s.levels[2].idle_cycles = total - busy_l2;
  return m.s;
}

}  // namespace cachescape
