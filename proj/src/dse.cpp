#include "cachescape/dse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "cachescape/error.hpp"
#include "cachescape/workload.hpp"
#include "parallel.hpp"

namespace cachescape {

std::string to_string(const CacheSizes& sizes) {
  return "(" + format_size(sizes.l1) + "," + format_size(sizes.l2) + ")";
}

bool SweepGrid::admissible(const CacheSizes& sizes) const { return !l1_le_l2 || sizes.l1 <= sizes.l2; }

bool SweepGrid::contains(const CacheSizes& sizes) const {
  return std::binary_search(l1_sizes.begin(), l1_sizes.end(), sizes.l1) &&
         std::binary_search(l2_sizes.begin(), l2_sizes.end(), sizes.l2) && admissible(sizes);
}

std::vector<CacheSizes> SweepGrid::configs() const {
  std::vector<CacheSizes> out;
  for (auto l1 : l1_sizes) {
    for (auto l2 : l2_sizes) {
      if (admissible({l1, l2})) out.push_back({l1, l2});
    }
  }
  return out;
}

void validate(SweepGrid& grid) {
  for (auto* sizes : {&grid.l1_sizes, &grid.l2_sizes}) {
    std::sort(sizes->begin(), sizes->end());
    sizes->erase(std::unique(sizes->begin(), sizes->end()), sizes->end());
  }
  if (grid.l1_sizes.empty()) throw ValidationError("sweep grid: l1_sizes is empty");
  if (grid.l2_sizes.empty()) throw ValidationError("sweep grid: l2_sizes is empty");
  if (grid.configs().empty()) throw ValidationError("sweep grid: no admissible configuration");
  for (auto size : grid.l1_sizes) {
    validate(CacheConfig{Level::L1I, size, grid.l1i.line_size, grid.l1i.associativity, 1});
    validate(CacheConfig{Level::L1D, size, grid.l1d.line_size, grid.l1d.associativity, 1});
  }
  for (auto size : grid.l2_sizes) {
    validate(CacheConfig{Level::L2, size, grid.l2.line_size, grid.l2.associativity, 1});
  }
  if (grid.l2.line_size < std::max(grid.l1i.line_size, grid.l1d.line_size)) {
    throw ValidationError("sweep grid: L2 line size must be >= the L1 line sizes");
  }
}

HierarchyConfig make_hierarchy(const SweepGrid& grid, const CacheSizes& sizes,
                               const EnergyTable& table) {
  HierarchyConfig h;
  h.l1i = CacheConfig{Level::L1I, sizes.l1, grid.l1i.line_size, grid.l1i.associativity, 1};
  h.l1d = CacheConfig{Level::L1D, sizes.l1, grid.l1d.line_size, grid.l1d.associativity, 1};
  h.l2 = CacheConfig{Level::L2, sizes.l2, grid.l2.line_size, grid.l2.associativity, 1};
  for (CacheConfig* c : {&h.l1i, &h.l1d, &h.l2}) c->access_latency = table.lookup(*c).access_latency;
  h.mem_latency = table.memory().access_latency;
  validate(h);
  return h;
}

void check_table_coverage(const SweepGrid& grid, const EnergyTable& table) {
  for (const auto& sizes : grid.configs()) make_hierarchy(grid, sizes, table);
}

double performance_penalty(std::uint64_t cycles, std::uint64_t baseline_cycles) {
  if (cycles == 0 || baseline_cycles == 0) return 0.0;
  return static_cast<double>(baseline_cycles) / static_cast<double>(cycles) - 1.0;
}

double energy_saving(Energy energy, Energy baseline_energy) {
  if (baseline_energy == Energy{}) return 0.0;
  return 1.0 - energy.to_double() / baseline_energy.to_double();
}

namespace {

template <class Config>
void attach_metrics_impl(std::vector<DsePoint<Config>>& points, const Config& baseline,
                         const std::string& what) {
  std::map<std::string, const DsePoint<Config>*> base;
  for (const auto& p : points) {
    if (p.config == baseline) base.emplace(p.workload, &p);
  }
  // Copy the baseline values first: points are updated in place below.
  std::map<std::string, std::tuple<std::uint64_t, Energy, Energy>> ref;
  for (const auto& [name, p] : base) ref[name] = {p->cycles, p->energy.e_t, p->energy.e_td};
  for (auto& p : points) {
    const auto it = ref.find(p.workload);
    if (it == ref.end()) {
      throw ValidationError("baseline " + what + " was not evaluated for workload '" + p.workload + "'");
    }
    const auto& [cycles, e_t, e_td] = it->second;
    p.pp = performance_penalty(p.cycles, cycles);
    p.es = energy_saving(p.energy.e_t, e_t);
    p.es_dynamic = energy_saving(p.energy.e_td, e_td);
  }
}

template <class Config>
std::vector<AveragedPoint<Config>> average_impl(std::span<const DsePoint<Config>> points) {
  std::vector<AveragedPoint<Config>> out;
  std::vector<std::size_t> counts;
  for (const auto& p : points) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& a) { return a.config == p.config; });
    if (it == out.end()) {
      out.push_back(AveragedPoint<Config>{p.config});
      counts.push_back(0);
      it = out.end() - 1;
    }
    const auto i = static_cast<std::size_t>(it - out.begin());
    it->total_cycles += p.cycles;
    it->pp += p.pp;
    it->es += p.es;
    it->es_dynamic += p.es_dynamic;
    ++counts[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto k = static_cast<double>(counts[i]);
    out[i].pp /= k;
    out[i].es /= k;
    out[i].es_dynamic /= k;
  }
  return out;
}

template <class Key>
CacheSizes argmin(std::span<const CachePoint> points, Key key) {
  if (points.empty()) throw ContractError("argmin over an empty point set");
  const CachePoint* best = &points.front();
  for (const auto& p : points) {
    const auto a = std::make_tuple(key(p), p.config.total(), p.config.l1);
    const auto b = std::make_tuple(key(*best), best->config.total(), best->config.l1);
    if (a < b) best = &p;
  }
  return best->config;
}

const CacheSummary* find_summary(std::span<const CacheSummary> averaged, const CacheSizes& c) {
  for (const auto& a : averaged) {
    if (a.config == c) return &a;
  }
  return nullptr;
}

}  // namespace

void attach_metrics(std::vector<CachePoint>& points, const CacheSizes& baseline) {
  attach_metrics_impl(points, baseline, "cache config " + to_string(baseline));
}

void attach_metrics(std::vector<RegfilePoint>& points, std::uint32_t baseline) {
  attach_metrics_impl(points, baseline, "register file size " + std::to_string(baseline));
}

std::vector<CacheSummary> average_points(std::span<const CachePoint> points) {
  return average_impl(points);
}

std::vector<RegfileSummary> average_points(std::span<const RegfilePoint> points) {
  return average_impl(points);
}

namespace {

void check_unique_names(std::span<const Trace> workloads) {
  if (workloads.empty()) throw ValidationError("no workloads given");
  std::set<std::string> seen;
  for (const auto& w : workloads) {
    if (!seen.insert(w.name).second) throw ValidationError("duplicate workload name '" + w.name + "'");
  }
}

CoreConfig single_thread(CoreConfig core) {
  core.num_threads = 1;
  validate(core);
  return core;
}

}  // namespace

std::vector<CachePoint> sweep_cache(const SweepGrid& grid, std::span<const Trace> workloads,
                                    const EnergyTable& table, const CoreConfig& core,
                                    const CacheSizes& baseline, unsigned jobs) {
  check_unique_names(workloads);
  const CoreConfig core1 = single_thread(core);
  const auto configs = grid.configs();
  if (configs.empty()) throw ValidationError("sweep grid: no admissible configuration");
  if (!grid.contains(baseline)) {
    throw ValidationError("baseline " + to_string(baseline) + " is not a grid point");
  }
  std::vector<HierarchyConfig> hierarchies;
  hierarchies.reserve(configs.size());
  for (const auto& c : configs) hierarchies.push_back(make_hierarchy(grid, c, table));

  std::vector<CachePoint> points(workloads.size() * configs.size());
  detail::parallel_for(points.size(), jobs, [&](std::size_t i) {
    const Trace& trace = workloads[i / configs.size()];
    const std::size_t c = i % configs.size();
    const SmtStats stats = run_single(core1, hierarchies[c], trace);
    CachePoint& p = points[i];
    p.workload = trace.name;
    p.config = configs[c];
    p.cycles = stats.total_cycles;
    p.energy = total_energy(stats.underlying, table, hierarchies[c]);
  });
  attach_metrics(points, baseline);
  return points;
}

CacheSizes find_hcp(std::span<const CachePoint> points) {
  return argmin(points, [](const CachePoint& p) { return p.cycles; });
}

CacheSizes find_lce(std::span<const CachePoint> points) {
  return argmin(points, [](const CachePoint& p) { return p.energy.e_t; });
}

WorkloadSummary summarize_workload(std::string workload, std::span<const CachePoint> points) {
  WorkloadSummary s;
  s.workload = std::move(workload);
  s.hcp = find_hcp(points);
  s.lce = find_lce(points);
  s.range_l1 = {std::min(s.hcp.l1, s.lce.l1), std::max(s.hcp.l1, s.lce.l1)};
  s.range_l2 = {std::min(s.hcp.l2, s.lce.l2), std::max(s.hcp.l2, s.lce.l2)};
  return s;
}

OverlapResult overlap(std::span<const WorkloadSummary> workloads, const SweepGrid& grid) {
  if (workloads.empty()) throw ContractError("overlap_ranges: no workloads");
  OverlapResult r;
  const auto keep = [&](const std::vector<std::uint64_t>& sizes, auto range_of,
                        std::vector<unsigned>& coverage, std::vector<std::uint64_t>& kept) {
    coverage.assign(sizes.size(), 0);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      for (const auto& w : workloads) coverage[i] += range_of(w).contains(sizes[i]) ? 1 : 0;
    }
    const unsigned best = *std::max_element(coverage.begin(), coverage.end());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (best > 0 && coverage[i] == best) kept.push_back(sizes[i]);
    }
  };
  keep(grid.l1_sizes, [](const WorkloadSummary& w) { return w.range_l1; }, r.coverage_l1, r.kept_l1);
  keep(grid.l2_sizes, [](const WorkloadSummary& w) { return w.range_l2; }, r.coverage_l2, r.kept_l2);
  for (auto l1 : r.kept_l1) {
    for (auto l2 : r.kept_l2) {
      if (grid.admissible({l1, l2})) r.candidates.push_back({l1, l2});
    }
  }
  return r;
}

std::vector<CacheSizes> overlap_ranges(std::span<const WorkloadSummary> workloads,
                                       const SweepGrid& grid) {
  return overlap(workloads, grid).candidates;
}

std::vector<CacheSizes> prune_by_saving(std::span<const CacheSizes> candidates,
                                        std::span<const CacheSummary> averaged,
                                        const CacheSizes& baseline, double pp_tolerance) {
  if (find_summary(averaged, baseline) == nullptr) {
    throw ContractError("prune_by_saving: baseline " + to_string(baseline) + " has no point");
  }
  std::vector<CacheSizes> kept;
  for (const auto& c : candidates) {
    const CacheSummary* a = find_summary(averaged, c);
    if (a == nullptr) throw ContractError("prune_by_saving: candidate " + to_string(c) + " has no point");
    if (c == baseline || (a->es_dynamic > 0.0 && a->pp >= -pp_tolerance)) kept.push_back(c);
  }
  return kept;
}

CacheSizes choose_config(std::span<const CacheSizes> pruned, std::span<const CacheSummary> averaged) {
  if (pruned.empty()) {
    throw ContractError("no configuration survived pruning; relax the performance-penalty tolerance");
  }
  const auto key = [&](const CacheSizes& c) {
    const CacheSummary* a = find_summary(averaged, c);
    return std::make_tuple(c.total(), a == nullptr ? 0.0 : -a->es, c.l1);
  };
  return *std::min_element(pruned.begin(), pruned.end(),
                           [&](const auto& a, const auto& b) { return key(a) < key(b); });
}

std::size_t DseReport::configs_per_workload() const {
  return per_workload.empty() ? 0 : points.size() / per_workload.size();
}

double DseReport::reduction_percent() const {
  const auto n = overlap.candidates.size();
  if (n == 0) return 0.0;
  return 100.0 * static_cast<double>(n - pruned.size()) / static_cast<double>(n);
}

DseReport explore_cache(std::vector<CachePoint> points, const SweepGrid& grid,
                        const CacheSizes& baseline, double pp_tolerance) {
  if (!grid.contains(baseline)) {
    throw ValidationError("baseline " + to_string(baseline) + " is not a grid point");
  }
  if (!std::isfinite(pp_tolerance) || pp_tolerance < 0.0) {
    throw ValidationError("pp_tolerance must be a non-negative number");
  }
  if (points.empty()) throw ValidationError("no design points to explore");
  for (const auto& p : points) {
    if (!grid.contains(p.config)) {
      throw ValidationError("point " + p.workload + " " + to_string(p.config) + " is not a grid point");
    }
  }
  DseReport r;
  r.grid = grid;
  r.baseline = baseline;
  r.pp_tolerance = pp_tolerance;
  attach_metrics(points, baseline);
  r.points = std::move(points);

  std::vector<std::string> order;
  std::map<std::string, std::vector<CachePoint>> by_workload;
  for (const auto& p : r.points) {
    auto& bucket = by_workload[p.workload];
    if (bucket.empty()) order.push_back(p.workload);
    bucket.push_back(p);
  }
  for (const auto& name : order) r.per_workload.push_back(summarize_workload(name, by_workload[name]));

  r.overlap = overlap(r.per_workload, grid);
  const auto averaged = average_points(r.points);
  for (const auto& c : r.overlap.candidates) {
    const CacheSummary* a = find_summary(averaged, c);
    if (a == nullptr) throw ContractError("overlap candidate " + to_string(c) + " was not evaluated");
    r.candidate_metrics.push_back(*a);
  }
  r.pruned = prune_by_saving(r.overlap.candidates, averaged, baseline, pp_tolerance);
  r.chosen = choose_config(r.pruned, averaged);
  return r;
}

Explorer::Explorer(SweepGrid grid, EnergyTable table, CoreConfig core)
    : grid_(std::move(grid)), table_(std::move(table)), core_(core) {
  validate(grid_);
  validate(single_thread(core_));
}

void Explorer::set_baseline(const CacheSizes& baseline) {
  if (!grid_.contains(baseline)) {
    throw ValidationError("baseline " + to_string(baseline) + " is not a grid point");
  }
  cache_baseline_ = baseline;
}

void Explorer::set_baseline(std::uint32_t regfile_size) {
  if (regfile_size < 1) throw ValidationError("register file baseline must be >= 1");
  regfile_baseline_ = regfile_size;
}

std::vector<CachePoint> Explorer::sweep_cache(std::span<const Trace> workloads) const {
  return cachescape::sweep_cache(grid_, workloads, table_, core_, cache_baseline_, jobs_);
}

DseReport Explorer::run(std::span<const Trace> workloads, double pp_tolerance) const {
  return explore_cache(sweep_cache(workloads), grid_, cache_baseline_, pp_tolerance);
}

std::vector<RegfilePoint> sweep_regfile(std::span<const std::uint32_t> sizes,
                                        const CoreConfig& core, const HierarchyConfig& hierarchy,
                                        const EnergyTable& table, std::span<const Trace> workloads,
                                        std::uint32_t baseline, unsigned jobs) {
  check_unique_names(workloads);
  if (sizes.empty()) throw ValidationError("register file sweep: no sizes");
  if (std::find(sizes.begin(), sizes.end(), baseline) == sizes.end()) {
    throw ValidationError("register file baseline " + std::to_string(baseline) +
                          " is not one of the swept sizes");
  }
  std::vector<CoreConfig> cores;
  for (auto size : sizes) {
    CoreConfig c = core;
    c.regfile_size = size;
    cores.push_back(single_thread(c));
  }
  validate(hierarchy);
  for (Level level : kLevels) table.lookup(hierarchy.at(level));

  std::vector<RegfilePoint> points(workloads.size() * sizes.size());
  detail::parallel_for(points.size(), jobs, [&](std::size_t i) {
    const Trace& trace = workloads[i / sizes.size()];
    const std::size_t s = i % sizes.size();
    const SmtStats stats = run_single(cores[s], hierarchy, trace);
    RegfilePoint& p = points[i];
    p.workload = trace.name;
    p.config = sizes[s];
    p.cycles = stats.total_cycles;
    p.energy = total_energy(stats.underlying, table, hierarchy);
  });
  attach_metrics(points, baseline);
  return points;
}

std::uint32_t select_regfile(std::span<const RegfileSummary> points, RegfileObjective objective) {
  if (points.empty()) throw ContractError("select_regfile: empty sweep");
  const RegfileSummary* best = &points.front();
  for (const auto& p : points) {
    bool better;
    if (objective == RegfileObjective::Performance) {
      better = p.total_cycles < best->total_cycles ||
               (p.total_cycles == best->total_cycles && p.config < best->config);
    } else {
      better = p.es > best->es || (p.es == best->es && p.config < best->config);
    }
    if (better) best = &p;
  }
  return best->config;
}

ScalingReport thread_scaling(const CoreConfig& core, const HierarchyConfig& hierarchy,
                             std::span<const Trace> workloads, unsigned max_threads, unsigned jobs) {
  if (max_threads < 1) throw ContractError("thread_scaling: max_threads must be >= 1");
  if (workloads.size() < max_threads) {
    throw ContractError("thread_scaling: " + std::to_string(max_threads) + " threads need as many workloads, got " +
                        std::to_string(workloads.size()));
  }
  const CoreConfig core1 = single_thread(core);
  const std::size_t w = workloads.size();

  std::vector<Trace> lone(w);
  for (std::size_t i = 0; i < w; ++i) lone[i] = relocate(workloads[i], 0, 0);
  std::vector<std::uint64_t> single(w);
  detail::parallel_for(w, jobs, [&](std::size_t i) {
    single[i] = run_single(core1, hierarchy, lone[i]).total_cycles;
  });

  const auto smt_cycles = [&](unsigned n, auto trace_for) {
    std::vector<Trace> traces;
    for (unsigned k = 0; k < n; ++k) {
      traces.push_back(relocate(trace_for(k), static_cast<std::uint16_t>(k), k * kThreadAddressStride));
    }
    CoreConfig c = core;
    c.num_threads = n;
    return run_smt(c, hierarchy, traces).total_cycles;
  };

  // Task layout: per n, one mixed run followed by one homogeneous run per workload.
  const std::size_t per_n = 1 + w;
  std::vector<std::uint64_t> cycles(max_threads * per_n);
  detail::parallel_for(cycles.size(), jobs, [&](std::size_t i) {
    const unsigned n = static_cast<unsigned>(i / per_n) + 1;
    const std::size_t j = i % per_n;
    if (j == 0) {
      cycles[i] = smt_cycles(n, [&](unsigned k) -> const Trace& { return workloads[k]; });
    } else {
      cycles[i] = smt_cycles(n, [&](unsigned) -> const Trace& { return workloads[j - 1]; });
    }
  });

  const auto ratio = [](std::uint64_t a, std::uint64_t b) {
    return b == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  ScalingReport report;
  for (unsigned n = 1; n <= max_threads; ++n) {
    ScalingStep step;
    step.threads = n;
    for (unsigned k = 0; k < n; ++k) step.sequential_cycles += single[k];
    step.smt_cycles = cycles[(n - 1) * per_n];
    step.speedup = ratio(step.sequential_cycles, step.smt_cycles);
    for (std::size_t j = 0; j < w; ++j) {
      step.improvement.emplace_back(workloads[j].name,
                                    ratio(n * single[j], cycles[(n - 1) * per_n + 1 + j]) - 1.0);
    }
    if (step.speedup > 1.0) report.max_supported_threads = n;
    report.steps.push_back(std::move(step));
  }
  return report;
}

}  // namespace cachescape
