#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "cachescape/cache.hpp"

namespace cachescape {

// Non-negative energy held as an exact fixed-point count of 1e-9 units, so
// the report identities hold with zero tolerance. The physical unit is table
// metadata and never enters the arithmetic.
class Energy {
 public:
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Energy() = default;

  static constexpr Energy from_nano(__int128 nano) { return Energy(nano); }
  // Exact decimal, at most 9 fractional digits, no sign or exponent.
  static Energy parse(std::string_view text);

  constexpr __int128 nano() const { return nano_; }
  double to_double() const;
  // Shortest exact decimal rendering: "24", "0.5", "1.000000001".
  std::string to_string() const;

  constexpr Energy& operator+=(Energy other) {
    nano_ += other.nano_;
    return *this;
  }
  friend constexpr Energy operator+(Energy a, Energy b) { return Energy(a.nano_ + b.nano_); }
  friend constexpr Energy operator-(Energy a, Energy b) { return Energy(a.nano_ - b.nano_); }
  friend constexpr Energy operator*(Energy e, std::uint64_t k) {
    return Energy(e.nano_ * static_cast<__int128>(k));
  }
  friend constexpr Energy operator*(std::uint64_t k, Energy e) { return e * k; }

  friend constexpr bool operator==(Energy, Energy) = default;
  friend constexpr auto operator<=>(Energy a, Energy b) { return a.nano_ <=> b.nano_; }

 private:
  constexpr explicit Energy(__int128 nano) : nano_(nano) {}
  __int128 nano_ = 0;
};

struct EnergyParams {
  Energy e_dyn_read;
  Energy e_dyn_write;
  Energy e_static_per_access;
  std::uint32_t access_latency = 1;

  friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

struct EnergyKey {
  Level level = Level::L1D;
  std::uint64_t size = 0;
  std::uint32_t associativity = 0;
  std::uint64_t line_size = 0;

  friend auto operator<=>(const EnergyKey&, const EnergyKey&) = default;
};

std::string to_string(const EnergyKey& key);

// Per-geometry energy parameters, CACTI style. Lookups never fall back to a
// default: a missing row is a LookupError.
class EnergyTable {
 public:
  // Throws ValidationError on duplicates.
  void add(const EnergyKey& key, const EnergyParams& params);
  void set_memory(const EnergyParams& params) { mem_ = params; }

  const EnergyParams& lookup(const EnergyKey& key) const;
  const EnergyParams& lookup(const CacheConfig& config) const;
  bool contains(const EnergyKey& key) const { return rows_.contains(key); }

  const EnergyParams& memory() const { return mem_; }
  const std::map<EnergyKey, EnergyParams>& rows() const { return rows_; }

  // Physical unit label, e.g. "nJ". Metadata only.
  const std::string& unit() const { return unit_; }
  void set_unit(std::string unit) { unit_ = std::move(unit); }

  // Within each (level, associativity, line) group, e_dyn_read and
  // e_static_per_access must be non-decreasing in size; latencies >= 1.
  void validate() const;

  friend bool operator==(const EnergyTable&, const EnergyTable&) = default;

 private:
  std::map<EnergyKey, EnergyParams> rows_;
  EnergyParams mem_;
  std::string unit_;
};

inline constexpr std::string_view kEnergyCsvHeader =
    "level,size_bytes,assoc,line_bytes,e_dyn_read,e_dyn_write,e_static_per_access,latency_cycles";

// Strict CSV reader: exact header, one MEM row, no duplicate keys. Lines
// starting with '#' are comments; "# unit: nJ" sets the unit label.
EnergyTable read_energy_table(std::istream& in);
EnergyTable read_energy_table_file(const std::filesystem::path& path);
void write_energy_table(const EnergyTable& table, std::ostream& out);

// Bundled fixture table. The values are non-physical: size-monotone
// placeholders for demos and tests, covering L1 sizes 1K..1M, L2 sizes
// 4K..8M, associativities 1..16 and lines 16..128 bytes.
EnergyTable default_energy_table();

struct EnergyReport {
  Energy e_dr;
  Energy e_dw;
  Energy e_td;
  std::array<Energy, 3> e_s{};  // indexed by Level
  Energy e_ts;
  Energy e_t;

  friend bool operator==(const EnergyReport&, const EnergyReport&) = default;
};

// Reads of L1I, L1D, L2 and memory, each times its per-read energy.
Energy dynamic_read_energy(const SimStats& stats, const EnergyTable& table,
                           const HierarchyConfig& hierarchy);
Energy dynamic_write_energy(const SimStats& stats, const EnergyTable& table,
                            const HierarchyConfig& hierarchy);

// (n_miss + idle_cycles) * e_static_per_access * miss_penalty_cycles.
Energy static_energy_level(const LevelStats& level_stats, const EnergyParams& params,
                           std::uint64_t miss_penalty_cycles);

// Miss penalty of a level: the access latency of the level below it (L2 for
// both L1s, memory for L2).
std::uint64_t miss_penalty(const HierarchyConfig& hierarchy, Level level);

// Static energy is summed over the three cache levels only; main memory
// contributes dynamic energy but no static term.
EnergyReport total_energy(const SimStats& stats, const EnergyTable& table,
                          const HierarchyConfig& hierarchy);

}  // namespace cachescape
