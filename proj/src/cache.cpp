#include "cachescape/cache.hpp"

#include <bit>

#include "cachescape/cache_hierarchy.hpp"
#include "cachescape/error.hpp"

namespace cachescape {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::L1I:
      return "L1I";
    case Level::L1D:
      return "L1D";
    case Level::L2:
      return "L2";
  }
  return "?";
}

Level parse_level(std::string_view name) {
  for (Level level : kLevels) {
    if (to_string(level) == name) return level;
  }
  throw ParseError(0, "unknown cache level '" + std::string(name) + "'");
}

const CacheConfig& HierarchyConfig::at(Level level) const {
  switch (level) {
    case Level::L1I:
      return l1i;
    case Level::L1D:
      return l1d;
    case Level::L2:
      return l2;
  }
  return l2;
}

void validate(const CacheConfig& c) {
  const std::string name(to_string(c.level));
  if (!std::has_single_bit(c.size)) {
    throw ValidationError(name + " size must be a power of two, got " + std::to_string(c.size));
  }
  if (!std::has_single_bit(c.line_size)) {
    throw ValidationError(name + " line_size must be a power of two, got " +
                          std::to_string(c.line_size));
  }
  if (!std::has_single_bit(c.associativity) || c.associativity > c.size / c.line_size ||
      c.line_size > c.size) {
    throw ValidationError(name + " associativity must be a power of two <= size/line_size, got " +
                          std::to_string(c.associativity));
  }
  if (c.access_latency < 1) throw ValidationError(name + " access_latency must be >= 1");
}

void validate(const HierarchyConfig& h) {
  if (h.l1i.level != Level::L1I || h.l1d.level != Level::L1D || h.l2.level != Level::L2) {
    throw ValidationError("hierarchy levels must be L1I, L1D, L2");
  }
  validate(h.l1i);
  validate(h.l1d);
  validate(h.l2);
  if (h.l2.line_size < h.l1i.line_size || h.l2.line_size < h.l1d.line_size) {
    throw ValidationError("L2 line_size must be >= both L1 line sizes");
  }
  if (h.mem_latency < 1) throw ValidationError("mem_latency must be >= 1");
}

SetAssocCache::SetAssocCache(const CacheConfig& config)
    : ways_(config.associativity),
      set_mask_(config.num_sets() - 1),
      line_shift_(static_cast<unsigned>(std::countr_zero(config.line_size))),
      lines_(config.size / config.line_size, 0),
      stamps_(config.size / config.line_size, 0),
      dirty_(config.size / config.line_size, 0) {}

SetAssocCache::Outcome SetAssocCache::access(std::uint64_t address, bool is_write) {
  const std::uint64_t line = address >> line_shift_;
  const std::size_t base = static_cast<std::size_t>(line & set_mask_) * ways_;
  ++clock_;

  std::size_t victim = base;
  for (std::size_t w = base; w < base + ways_; ++w) {
    if (stamps_[w] != 0 && lines_[w] == line) {
      stamps_[w] = clock_;
      if (is_write) dirty_[w] = 1;
      return {true, std::nullopt};
    }
    if (stamps_[w] < stamps_[victim]) victim = w;
  }

  Outcome out;
  if (stamps_[victim] != 0 && dirty_[victim]) out.writeback = lines_[victim] << line_shift_;
  lines_[victim] = line;
  stamps_[victim] = clock_;
  dirty_[victim] = is_write ? 1 : 0;
  return out;
}

CacheHierarchy::CacheHierarchy(const HierarchyConfig& config)
    : config_((validate(config), config)), l1i_(config.l1i), l1d_(config.l1d), l2_(config.l2) {}

Depth CacheHierarchy::fetch(std::uint64_t pc) {
  return access_l1(l1i_, stats_.at(Level::L1I), pc, false);
}

Depth CacheHierarchy::data(std::uint64_t address, bool is_write) {
  return access_l1(l1d_, stats_.at(Level::L1D), address, is_write);
}

std::uint64_t CacheHierarchy::latency(Level l1, Depth depth) const {
  std::uint64_t cycles = config_.at(l1).access_latency;
  if (depth >= Depth::L2) cycles += config_.l2.access_latency;
  if (depth == Depth::Memory) cycles += config_.mem_latency;
  return cycles;
}

Depth CacheHierarchy::access_l1(SetAssocCache& cache, LevelStats& s, std::uint64_t address,
                                bool is_write) {
  ++(is_write ? s.n_write : s.n_read);
  const auto out = cache.access(address, is_write);
  if (out.hit) {
    ++s.n_hit;
    return Depth::L1;
  }
  ++s.n_miss;
  ++s.fills;
  const Depth depth = access_l2(cache.line_base(address), false);
  if (out.writeback) {
    ++s.dirty_evictions;
    access_l2(*out.writeback, true);
  }
  return depth;
}

Depth CacheHierarchy::access_l2(std::uint64_t address, bool is_write) {
  LevelStats& s = stats_.at(Level::L2);
  ++(is_write ? s.n_write : s.n_read);
  const auto out = l2_.access(address, is_write);
  if (out.hit) {
    ++s.n_hit;
    return Depth::L2;
  }
  ++s.n_miss;
  ++s.fills;
  ++stats_.mem_reads;
  if (out.writeback) {
    ++s.dirty_evictions;
    ++stats_.mem_writes;
  }
  return Depth::Memory;
}

SimStats simulate(const HierarchyConfig& hierarchy, const Trace& trace) {
  CacheHierarchy mem(hierarchy);
  std::array<std::uint64_t, 3> busy{};
  std::uint64_t cycles = 0;

  const auto account = [&](Level l1, Depth depth) {
    const std::uint64_t lat = mem.latency(l1, depth);
    busy[static_cast<std::size_t>(l1)] += lat;
    if (depth != Depth::L1) busy[2] += lat - hierarchy.at(l1).access_latency;
    cycles += lat;
  };

  for (const auto& rec : trace.records) {
    if (rec.thread_id != 0) {
      throw ContractError("simulate: record with thread id " + std::to_string(rec.thread_id) +
                          "; multi-thread traces go through run_smt");
    }
    cycles += 1;
    account(Level::L1I, mem.fetch(rec.pc));
    if (rec.mem) account(Level::L1D, mem.data(rec.mem->address, rec.mem->kind == MemKind::Store));
  }

  SimStats stats = mem.stats();
  stats.total_cycles = cycles;
  stats.instructions_retired = trace.size();
  for (Level level : kLevels) {
    stats.at(level).idle_cycles = cycles - busy[static_cast<std::size_t>(level)];
  }
  return stats;
}

}  // namespace cachescape
