#include "cachescape/energy.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <tuple>
#include <ostream>
#include <vector>

#include "cachescape/error.hpp"

namespace cachescape {

Energy Energy::parse(std::string_view text) {
  const std::size_t dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  const auto all_digits = [](std::string_view s) {
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  };
  if (whole.empty() || !all_digits(whole) || !all_digits(frac) ||
      (dot != std::string_view::npos && frac.empty())) {
    throw ParseError(0, "not a non-negative decimal energy: '" + std::string(text) + "'");
  }
  if (frac.size() > 9) {
    throw ParseError(0, "energy has more than 9 fractional digits: '" + std::string(text) + "'");
  }
  if (whole.size() > 20) throw ParseError(0, "energy out of range: '" + std::string(text) + "'");
  __int128 nano = 0;
  for (char c : whole) nano = nano * 10 + (c - '0');
  for (std::size_t i = 0; i < 9; ++i) nano = nano * 10 + (i < frac.size() ? frac[i] - '0' : 0);
  return Energy(nano);
}

double Energy::to_double() const {
  return static_cast<double>(nano_ / kScale) + static_cast<double>(nano_ % kScale) / kScale;
}

std::string Energy::to_string() const {
  __int128 v = nano_;
  const bool negative = v < 0;
  if (negative) v = -v;
  __int128 whole = v / kScale;
  auto frac = static_cast<std::int64_t>(v % kScale);
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  } while (whole != 0);
  if (negative) digits.insert(digits.begin(), '-');
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, 9 - f.size(), '0');
    while (f.back() == '0') f.pop_back();
    digits += '.';
    digits += f;
  }
  return digits;
}

std::string to_string(const EnergyKey& key) {
  return "(" + std::string(to_string(key.level)) + ", size " + std::to_string(key.size) +
         ", assoc " + std::to_string(key.associativity) + ", line " +
         std::to_string(key.line_size) + ")";
}

void EnergyTable::add(const EnergyKey& key, const EnergyParams& params) {
  if (!rows_.emplace(key, params).second) {
    throw ValidationError("duplicate energy row " + to_string(key));
  }
}

const EnergyParams& EnergyTable::lookup(const EnergyKey& key) const {
  const auto it = rows_.find(key);
  if (it == rows_.end()) throw LookupError("no energy row for " + to_string(key));
  return it->second;
}

const EnergyParams& EnergyTable::lookup(const CacheConfig& c) const {
  return lookup(EnergyKey{c.level, c.size, c.associativity, c.line_size});
}

void EnergyTable::validate() const {
  if (mem_.access_latency < 1) throw ValidationError("MEM latency_cycles must be >= 1");
  // rows_ is ordered by (level, size, ...), so each (level, assoc, line)
  // group is visited in ascending size.
  std::map<std::tuple<Level, std::uint32_t, std::uint64_t>, const EnergyParams*> previous;
  for (const auto& [key, params] : rows_) {
    if (params.access_latency < 1) {
      throw ValidationError("latency_cycles must be >= 1 for " + to_string(key));
    }
    const EnergyParams*& prev = previous[{key.level, key.associativity, key.line_size}];
    if (prev != nullptr && (params.e_dyn_read < prev->e_dyn_read ||
                            params.e_static_per_access < prev->e_static_per_access)) {
      throw ValidationError("energy must be non-decreasing in size: " + to_string(key) +
                            " is below the next smaller size");
    }
    prev = &params;
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(',', start);
    fields.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

std::uint64_t parse_count(std::string_view field, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line, std::string(what) + " must be an unsigned integer, got '" +
                               std::string(field) + "'");
  }
  return v;
}

Energy parse_energy(std::string_view field, std::size_t line, const char* what) {
  try {
    return Energy::parse(field);
  } catch (const ParseError& e) {
    throw ParseError(line, std::string(what) + ": " + e.reason());
  }
}

}  // namespace

EnergyTable read_energy_table(std::istream& in) {
  EnergyTable table;
  std::string text;
  std::size_t lineno = 0;
  bool saw_header = false;
  bool saw_mem = false;
  while (std::getline(in, text)) {
    ++lineno;
    if (!text.empty() && text.back() == '\r') throw ParseError(lineno, "CR line ending");
    if (!text.empty() && text.front() == '#') {
      constexpr std::string_view kUnit = "# unit:";
      if (text.starts_with(kUnit)) {
        std::string unit = text.substr(kUnit.size());
        while (!unit.empty() && unit.front() == ' ') unit.erase(unit.begin());
        table.set_unit(unit);
      }
      continue;
    }
    if (!saw_header) {
      if (text != kEnergyCsvHeader) {
        throw ParseError(lineno, "expected header '" + std::string(kEnergyCsvHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    const auto f = split_commas(text);
    if (f.size() != 8) {
      throw ParseError(lineno, "expected 8 fields, got " + std::to_string(f.size()));
    }
    EnergyParams params{parse_energy(f[4], lineno, "e_dyn_read"),
                        parse_energy(f[5], lineno, "e_dyn_write"),
                        parse_energy(f[6], lineno, "e_static_per_access"),
                        static_cast<std::uint32_t>(parse_count(f[7], lineno, "latency_cycles"))};
    if (params.access_latency < 1) throw ParseError(lineno, "latency_cycles must be >= 1");
    if (f[0] == "MEM") {
      if (f[1] != "0" || f[2] != "0" || f[3] != "0") {
        throw ParseError(lineno, "MEM row must have size, assoc and line fields of 0");
      }
      if (saw_mem) throw ParseError(lineno, "duplicate MEM row");
      saw_mem = true;
      table.set_memory(params);
      continue;
    }
    Level level;
    try {
      level = parse_level(f[0]);
    } catch (const ParseError& e) {
      throw ParseError(lineno, e.reason());
    }
    const EnergyKey key{level, parse_count(f[1], lineno, "size_bytes"),
                        static_cast<std::uint32_t>(parse_count(f[2], lineno, "assoc")),
                        parse_count(f[3], lineno, "line_bytes")};
    if (table.contains(key)) throw ParseError(lineno, "duplicate row " + to_string(key));
    table.add(key, params);
  }
  if (in.bad()) throw IoError("failed reading energy table");
  if (!saw_header) throw ParseError(0, "energy table: missing header");
  if (!saw_mem) throw ParseError(0, "energy table: missing MEM row");
  table.validate();
  return table;
}

EnergyTable read_energy_table_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open energy table '" + path.string() + "'");
  try {
    return read_energy_table(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  }
}

void write_energy_table(const EnergyTable& table, std::ostream& out) {
  if (!table.unit().empty()) out << "# unit: " << table.unit() << '\n';
  out << kEnergyCsvHeader << '\n';
  const auto row = [&out](std::string_view level, std::uint64_t size, std::uint64_t assoc,
                          std::uint64_t line, const EnergyParams& p) {
    out << level << ',' << size << ',' << assoc << ',' << line << ',' << p.e_dyn_read.to_string()
        << ',' << p.e_dyn_write.to_string() << ',' << p.e_static_per_access.to_string() << ','
        << p.access_latency << '\n';
  };
  for (const auto& [key, params] : table.rows()) {
    row(to_string(key.level), key.size, key.associativity, key.line_size, params);
  }
  row("MEM", 0, 0, 0, table.memory());
  if (!out) throw IoError("failed writing energy table");
}

EnergyTable default_energy_table() {
  const auto nano = [](double value) { return Energy::from_nano(std::llround(value * 1e9)); };
  EnergyTable table;
  table.set_unit("nJ (non-physical fixture)");
  for (Level level : kLevels) {
    const bool is_l2 = level == Level::L2;
    const std::uint64_t lo = is_l2 ? 4 * 1024 : 1024;
    const std::uint64_t hi = is_l2 ? 8 * 1024 * 1024 : 1024 * 1024;
    for (std::uint64_t size = lo; size <= hi; size *= 2) {
      const double kb = static_cast<double>(size) / 1024.0;
      std::uint32_t latency;
      if (is_l2) {
        latency = kb <= 128 ? 6 : kb <= 512 ? 8 : kb <= 2048 ? 10 : 14;
      } else {
        latency = kb <= 32 ? 1 : kb <= 128 ? 2 : 3;
      }
      for (std::uint64_t line = 16; line <= 128; line *= 2) {
        for (std::uint32_t assoc = 1; assoc <= 16; assoc *= 2) {
          if (assoc * line > size) continue;
          const double ways = std::log2(static_cast<double>(assoc));
          const double read = (is_l2 ? 1.5 : 1.0) * 0.004 * (1.0 + 0.15 * ways) *
                                  std::sqrt(static_cast<double>(line) / 64.0) * std::sqrt(kb) +
                              0.002;
          const double leak = 0.000002 * kb * (1.0 + 0.05 * ways);
          table.add(EnergyKey{level, size, assoc, line},
                    EnergyParams{nano(read), nano(read * 1.1), nano(leak), latency});
        }
      }
    }
  }
  table.set_memory(EnergyParams{nano(4.0), nano(4.5), Energy{}, 60});
  return table;
}

Energy dynamic_read_energy(const SimStats& stats, const EnergyTable& table,
                           const HierarchyConfig& h) {
  Energy e;
  for (Level level : kLevels) e += stats.at(level).n_read * table.lookup(h.at(level)).e_dyn_read;
  e += stats.mem_reads * table.memory().e_dyn_read;
  return e;
}

Energy dynamic_write_energy(const SimStats& stats, const EnergyTable& table,
                            const HierarchyConfig& h) {
  Energy e;
  for (Level level : kLevels) e += stats.at(level).n_write * table.lookup(h.at(level)).e_dyn_write;
  e += stats.mem_writes * table.memory().e_dyn_write;
  return e;
}

Energy static_energy_level(const LevelStats& level_stats, const EnergyParams& params,
                           std::uint64_t miss_penalty_cycles) {
  return (level_stats.n_miss + level_stats.idle_cycles) * params.e_static_per_access *
         miss_penalty_cycles;
}

std::uint64_t miss_penalty(const HierarchyConfig& h, Level level) {
  return level == Level::L2 ? h.mem_latency : h.l2.access_latency;
}

EnergyReport total_energy(const SimStats& stats, const EnergyTable& table,
                          const HierarchyConfig& h) {
  EnergyReport r;
  r.e_dr = dynamic_read_energy(stats, table, h);
  r.e_dw = dynamic_write_energy(stats, table, h);
  r.e_td = r.e_dr + r.e_dw;
  for (Level level : kLevels) {
    const auto i = static_cast<std::size_t>(level);
    r.e_s[i] = static_energy_level(stats.at(level), table.lookup(h.at(level)), miss_penalty(h, level));
    r.e_ts += r.e_s[i];
  }
  r.e_t = r.e_td + r.e_ts;
  return r;
}

}  // namespace cachescape
