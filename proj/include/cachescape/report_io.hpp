#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cachescape/cache.hpp"
#include "cachescape/dse.hpp"
#include "cachescape/energy.hpp"
#include "cachescape/smt.hpp"

namespace cachescape {

// Shortest round-trip rendering of a double ("0.1", "-0.0288461538461539").
std::string format_real(double value);

nlohmann::ordered_json to_json(const HierarchyConfig& hierarchy);
nlohmann::ordered_json to_json(const SimStats& stats);
nlohmann::ordered_json to_json(const EnergyReport& report);
nlohmann::ordered_json to_json(const CoreConfig& core);

// simulate command output.
nlohmann::ordered_json simulation_json(const std::string& trace_name, const HierarchyConfig& hierarchy,
                                       const SimStats& stats, const EnergyReport& energy);
// One row per level plus a MEM row and a TOTAL row.
void write_simulation_csv(std::ostream& out, const SimStats& stats, const EnergyReport& energy);

nlohmann::ordered_json to_json(const DseReport& report);

inline constexpr std::string_view kCachePointsHeader = "workload,l1,l2,cycles,e_t,e_td,pp,es";
inline constexpr std::string_view kRegfilePointsHeader = "workload,regfile,cycles,e_t,e_td,pp,es";

void write_points_csv(std::ostream& out, std::span<const CachePoint> points);
void write_points_csv(std::ostream& out, std::span<const RegfilePoint> points);

// Reads a cache points CSV back. Only cycles, e_t and e_td are taken from the
// file (pp/es are recomputed by explore_cache); the replayed EnergyReport
// carries e_td as its read term and e_t - e_td as its static total.
std::vector<CachePoint> read_points_csv(std::istream& in);

void write_workloads_csv(std::ostream& out, const DseReport& report);
void write_candidates_csv(std::ostream& out, const DseReport& report);
void write_candidates_plot(std::ostream& out, const DseReport& report);

// Human summary of a DseReport in its JSON form, shared by `dse` and `report`.
void print_dse_summary(std::ostream& out, const nlohmann::ordered_json& report);

nlohmann::ordered_json regfile_json(std::span<const RegfilePoint> points,
                                    std::span<const RegfileSummary> table, std::uint32_t baseline,
                                    std::uint32_t performance_pick, std::uint32_t energy_pick);
// Averaged table: regfile,total_cycles,pp,es.
void write_regfile_table_csv(std::ostream& out, std::span<const RegfileSummary> table);
void write_regfile_plot(std::ostream& out, std::span<const RegfileSummary> table);

nlohmann::ordered_json to_json(const ScalingReport& report);
void write_scaling_csv(std::ostream& out, const ScalingReport& report);
// Two columns: threads, speedup.
void write_scaling_plot(std::ostream& out, const ScalingReport& report);

}  // namespace cachescape
