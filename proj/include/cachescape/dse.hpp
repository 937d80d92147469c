#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cachescape/cache.hpp"
#include "cachescape/energy.hpp"
#include "cachescape/smt.hpp"
#include "cachescape/trace.hpp"

namespace cachescape {

// One cache design point: the same size is used for L1I and L1D.
struct CacheSizes {
  std::uint64_t l1 = 0;
  std::uint64_t l2 = 0;

  std::uint64_t total() const { return l1 + l2; }

  friend auto operator<=>(const CacheSizes&, const CacheSizes&) = default;
};

std::string to_string(const CacheSizes& sizes);  // "(16K,64K)"

inline constexpr CacheSizes kDefaultCacheBaseline{32 * 1024, 64 * 1024};
inline constexpr std::uint32_t kDefaultRegfileBaseline = 80;
inline constexpr double kDefaultPpTolerance = 0.03;

struct LevelGeometry {
  std::uint32_t associativity = 4;
  std::uint64_t line_size = 64;

  friend bool operator==(const LevelGeometry&, const LevelGeometry&) = default;
};

struct SweepGrid {
  std::vector<std::uint64_t> l1_sizes;  // ascending, unique
  std::vector<std::uint64_t> l2_sizes;  // ascending, unique
  LevelGeometry l1i{4, 64};
  LevelGeometry l1d{4, 64};
  LevelGeometry l2{8, 64};
  // When set, pairs with l1 > l2 are inadmissible.
  bool l1_le_l2 = false;

  bool admissible(const CacheSizes& sizes) const;
  bool contains(const CacheSizes& sizes) const;
  // Admissible configurations ordered by (l1, l2).
  std::vector<CacheSizes> configs() const;
};

// Sorts and deduplicates the size lists, then checks geometry. Throws
// ValidationError on an empty grid.
void validate(SweepGrid& grid);

// Hierarchy for one grid point; latencies come from the energy table rows.
HierarchyConfig make_hierarchy(const SweepGrid& grid, const CacheSizes& sizes,
                               const EnergyTable& table);

// Throws LookupError naming the first grid configuration without a row.
void check_table_coverage(const SweepGrid& grid, const EnergyTable& table);

template <class Config>
struct DsePoint {
  std::string workload;
  Config config{};
  std::uint64_t cycles = 0;
  EnergyReport energy;
  double pp = 0.0;          // perf(config) / perf(baseline) - 1, perf = 1/cycles
  double es = 0.0;          // 1 - E_t(config) / E_t(baseline)
  double es_dynamic = 0.0;  // 1 - E_td(config) / E_td(baseline)
};

using CachePoint = DsePoint<CacheSizes>;
using RegfilePoint = DsePoint<std::uint32_t>;

// Equal-weight mean over workloads of one configuration's metrics.
template <class Config>
struct AveragedPoint {
  Config config{};
  std::uint64_t total_cycles = 0;  // summed over workloads
  double pp = 0.0;
  double es = 0.0;
  double es_dynamic = 0.0;
};

using CacheSummary = AveragedPoint<CacheSizes>;
using RegfileSummary = AveragedPoint<std::uint32_t>;

double performance_penalty(std::uint64_t cycles, std::uint64_t baseline_cycles);
double energy_saving(Energy energy, Energy baseline_energy);

// Recomputes pp/es/es_dynamic of every point against the same workload's
// baseline point. Throws ValidationError if a workload lacks the baseline.
void attach_metrics(std::vector<CachePoint>& points, const CacheSizes& baseline);
void attach_metrics(std::vector<RegfilePoint>& points, std::uint32_t baseline);

// Points ordered by config in order of first appearance of each config.
std::vector<CacheSummary> average_points(std::span<const CachePoint> points);
std::vector<RegfileSummary> average_points(std::span<const RegfilePoint> points);

// Runs run_single for every (workload, config) pair and attaches energy and
// baseline-relative metrics. Output order is workload-major then config
// order, independent of `jobs`.
std::vector<CachePoint> sweep_cache(const SweepGrid& grid, std::span<const Trace> workloads,
                                    const EnergyTable& table, const CoreConfig& core,
                                    const CacheSizes& baseline, unsigned jobs = 1);

// Argmin of cycles (HCP) / E_t (LCE) over one workload's points. Ties go to
// the smaller l1 + l2, then the smaller l1.
CacheSizes find_hcp(std::span<const CachePoint> points);
CacheSizes find_lce(std::span<const CachePoint> points);

struct SizeRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool contains(std::uint64_t size) const { return lo <= size && size <= hi; }
  friend bool operator==(const SizeRange&, const SizeRange&) = default;
};

struct WorkloadSummary {
  std::string workload;
  CacheSizes hcp;
  CacheSizes lce;
  SizeRange range_l1;  // [min(lce, hcp), max(lce, hcp)]
  SizeRange range_l2;
};

WorkloadSummary summarize_workload(std::string workload, std::span<const CachePoint> points);

struct OverlapResult {
  std::vector<std::uint64_t> kept_l1;
  std::vector<std::uint64_t> kept_l2;
  std::vector<unsigned> coverage_l1;  // parallel to grid.l1_sizes
  std::vector<unsigned> coverage_l2;
  std::vector<CacheSizes> candidates;
};

// Keeps, per level, the grid sizes covered by the largest number of workload
// ranges and crosses the survivors (respecting grid admissibility).
OverlapResult overlap(std::span<const WorkloadSummary> workloads, const SweepGrid& grid);
std::vector<CacheSizes> overlap_ranges(std::span<const WorkloadSummary> workloads,
                                       const SweepGrid& grid);

// Keeps candidates with mean dynamic energy saving > 0 and mean pp >=
// -pp_tolerance. The baseline is kept whenever it is a candidate.
std::vector<CacheSizes> prune_by_saving(std::span<const CacheSizes> candidates,
                                        std::span<const CacheSummary> averaged,
                                        const CacheSizes& baseline,
                                        double pp_tolerance = kDefaultPpTolerance);

// Smallest l1 + l2 among the survivors; ties to larger es, then smaller l1.
// Throws ContractError on an empty set.
CacheSizes choose_config(std::span<const CacheSizes> pruned, std::span<const CacheSummary> averaged);

struct DseReport {
  SweepGrid grid;
  CacheSizes baseline;
  double pp_tolerance = kDefaultPpTolerance;
  std::vector<CachePoint> points;
  std::vector<WorkloadSummary> per_workload;
  OverlapResult overlap;
  std::vector<CacheSummary> candidate_metrics;  // one per overlap candidate
  std::vector<CacheSizes> pruned;
  CacheSizes chosen;

  std::size_t configs_per_workload() const;
  // Share of the overlap candidates removed by pruning, in percent.
  double reduction_percent() const;
};

// HCP/LCE -> overlap -> pruning -> choice over already evaluated points.
// Metrics are recomputed against `baseline`, which must be in the grid.
DseReport explore_cache(std::vector<CachePoint> points, const SweepGrid& grid,
                        const CacheSizes& baseline, double pp_tolerance = kDefaultPpTolerance);

// Holds the exploration context and the baselines every metric is relative to.
class Explorer {
 public:
  Explorer(SweepGrid grid, EnergyTable table, CoreConfig core);

  // Throws ValidationError if the configuration is not a grid point.
  void set_baseline(const CacheSizes& baseline);
  void set_baseline(std::uint32_t regfile_size);

  const CacheSizes& cache_baseline() const { return cache_baseline_; }
  std::uint32_t regfile_baseline() const { return regfile_baseline_; }
  const SweepGrid& grid() const { return grid_; }
  const EnergyTable& table() const { return table_; }
  const CoreConfig& core() const { return core_; }

  void set_jobs(unsigned jobs) { jobs_ = jobs; }

  std::vector<CachePoint> sweep_cache(std::span<const Trace> workloads) const;
  DseReport run(std::span<const Trace> workloads, double pp_tolerance = kDefaultPpTolerance) const;

 private:
  SweepGrid grid_;
  EnergyTable table_;
  CoreConfig core_;
  CacheSizes cache_baseline_ = kDefaultCacheBaseline;
  std::uint32_t regfile_baseline_ = kDefaultRegfileBaseline;
  unsigned jobs_ = 1;
};

// Register-file sweep on a fixed hierarchy; metrics relative to `baseline`,
// which must be one of `sizes`.
std::vector<RegfilePoint> sweep_regfile(std::span<const std::uint32_t> sizes,
                                        const CoreConfig& core, const HierarchyConfig& hierarchy,
                                        const EnergyTable& table, std::span<const Trace> workloads,
                                        std::uint32_t baseline, unsigned jobs = 1);

enum class RegfileObjective { Performance, Energy };

// Performance: smallest size reaching the minimum summed cycle count.
// Energy: size with the largest mean es, ties to the smaller size.
std::uint32_t select_regfile(std::span<const RegfileSummary> points, RegfileObjective objective);

struct ScalingStep {
  unsigned threads = 0;
  std::uint64_t sequential_cycles = 0;  // sum of lone runs
  std::uint64_t smt_cycles = 0;
  double speedup = 0.0;
  // Per workload: n copies of it under SMT vs n lone runs, minus one.
  std::vector<std::pair<std::string, double>> improvement;
};

struct ScalingReport {
  std::vector<ScalingStep> steps;  // threads = 1..max_threads
  unsigned max_supported_threads = 1;
};

// Offset between the address spaces of SMT thread copies.
inline constexpr std::uint64_t kThreadAddressStride = std::uint64_t{1} << 40;

// For n = 1..max_threads runs the first n workloads (thread k relocated by
// k * kThreadAddressStride) together and alone. max_supported_threads is the
// largest n with speedup > 1 (1 if none).
ScalingReport thread_scaling(const CoreConfig& core, const HierarchyConfig& hierarchy,
                             std::span<const Trace> workloads, unsigned max_threads,
                             unsigned jobs = 1);

}  // namespace cachescape
