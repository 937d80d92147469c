#include "cachescape/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "cachescape/error.hpp"
#include "cachescape/workload.hpp"

namespace cachescape {

using nlohmann::ordered_json;

std::string format_real(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json cache_json(const CacheConfig& c) {
  return {{"size", c.size},
          {"line_size", c.line_size},
          {"associativity", c.associativity},
          {"access_latency", c.access_latency}};
}

ordered_json sizes_json(const CacheSizes& s) { return {{"l1", s.l1}, {"l2", s.l2}}; }

ordered_json range_json(const SizeRange& r) { return ordered_json::array({r.lo, r.hi}); }

ordered_json sizes_list(std::span<const CacheSizes> list) {
  auto out = ordered_json::array();
  for (const auto& s : list) out.push_back(sizes_json(s));
  return out;
}

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

std::uint64_t parse_u64(std::string_view field, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line, std::string(what) + " must be an unsigned integer, got '" +
                               std::string(field) + "'");
  }
  return v;
}

}  // namespace

ordered_json to_json(const HierarchyConfig& h) {
  return {{"L1I", cache_json(h.l1i)},
          {"L1D", cache_json(h.l1d)},
          {"L2", cache_json(h.l2)},
          {"mem_latency", h.mem_latency}};
}

ordered_json to_json(const SimStats& s) {
  ordered_json levels;
  for (Level level : kLevels) {
    const LevelStats& l = s.at(level);
    levels[std::string(to_string(level))] = {{"n_read", l.n_read},
                                             {"n_write", l.n_write},
                                             {"n_hit", l.n_hit},
                                             {"n_miss", l.n_miss},
                                             {"idle_cycles", l.idle_cycles},
                                             {"fills", l.fills},
                                             {"dirty_evictions", l.dirty_evictions}};
  }
  return {{"levels", levels},
          {"mem_reads", s.mem_reads},
          {"mem_writes", s.mem_writes},
          {"total_cycles", s.total_cycles},
          {"instructions_retired", s.instructions_retired}};
}

ordered_json to_json(const EnergyReport& r) {
  ordered_json per_level;
  for (Level level : kLevels) {
    per_level[std::string(to_string(level))] = r.e_s[static_cast<std::size_t>(level)].to_double();
  }
  return {{"e_dr", r.e_dr.to_double()}, {"e_dw", r.e_dw.to_double()},
          {"e_td", r.e_td.to_double()}, {"e_s", per_level},
          {"e_ts", r.e_ts.to_double()}, {"e_t", r.e_t.to_double()}};
}

ordered_json to_json(const CoreConfig& c) {
  return {{"fetch_width", c.fetch_width},
          {"regfile_size", c.regfile_size},
          {"commit_latency", c.commit_latency},
          {"num_threads", c.num_threads}};
}

ordered_json simulation_json(const std::string& trace_name, const HierarchyConfig& hierarchy,
                             const SimStats& stats, const EnergyReport& energy) {
  return {{"trace", trace_name},
          {"hierarchy", to_json(hierarchy)},
          {"stats", to_json(stats)},
          {"energy", to_json(energy)}};
}

void write_simulation_csv(std::ostream& out, const SimStats& s, const EnergyReport& e) {
  out << "level,n_read,n_write,n_hit,n_miss,idle_cycles,fills,dirty_evictions,e_static\n";
  for (Level level : kLevels) {
    const LevelStats& l = s.at(level);
    out << to_string(level) << ',' << l.n_read << ',' << l.n_write << ',' << l.n_hit << ','
        << l.n_miss << ',' << l.idle_cycles << ',' << l.fills << ',' << l.dirty_evictions << ','
        << e.e_s[static_cast<std::size_t>(level)].to_string() << '\n';
  }
  out << "MEM," << s.mem_reads << ',' << s.mem_writes << ",,,,,,0\n";
  out << "# total_cycles=" << s.total_cycles << " instructions=" << s.instructions_retired
      << " e_dr=" << e.e_dr.to_string() << " e_dw=" << e.e_dw.to_string()
      << " e_td=" << e.e_td.to_string() << " e_ts=" << e.e_ts.to_string()
      << " e_t=" << e.e_t.to_string() << '\n';
}

ordered_json to_json(const DseReport& r) {
  ordered_json grid = {{"l1_sizes", r.grid.l1_sizes},
                       {"l2_sizes", r.grid.l2_sizes},
                       {"l1i", {{"associativity", r.grid.l1i.associativity}, {"line_size", r.grid.l1i.line_size}}},
                       {"l1d", {{"associativity", r.grid.l1d.associativity}, {"line_size", r.grid.l1d.line_size}}},
                       {"l2", {{"associativity", r.grid.l2.associativity}, {"line_size", r.grid.l2.line_size}}},
                       {"l1_le_l2", r.grid.l1_le_l2}};
  auto points = ordered_json::array();
  for (const auto& p : r.points) {
    points.push_back({{"workload", p.workload},
                      {"l1", p.config.l1},
                      {"l2", p.config.l2},
                      {"cycles", p.cycles},
                      {"e_t", p.energy.e_t.to_double()},
                      {"e_td", p.energy.e_td.to_double()},
                      {"e_ts", p.energy.e_ts.to_double()},
                      {"pp", p.pp},
                      {"es", p.es},
                      {"es_dynamic", p.es_dynamic}});
  }
  auto workloads = ordered_json::array();
  for (const auto& w : r.per_workload) {
    workloads.push_back({{"workload", w.workload},
                         {"hcp", sizes_json(w.hcp)},
                         {"lce", sizes_json(w.lce)},
                         {"range_l1", range_json(w.range_l1)},
                         {"range_l2", range_json(w.range_l2)}});
  }
  auto candidates = ordered_json::array();
  for (const auto& c : r.candidate_metrics) {
    candidates.push_back({{"l1", c.config.l1},
                          {"l2", c.config.l2},
                          {"total_cycles", c.total_cycles},
                          {"pp", c.pp},
                          {"es", c.es},
                          {"es_dynamic", c.es_dynamic}});
  }
  return {{"baseline", sizes_json(r.baseline)},
          {"pp_tolerance", r.pp_tolerance},
          {"grid", grid},
          {"configs_per_workload", r.configs_per_workload()},
          {"points", points},
          {"per_workload", workloads},
          {"overlap",
           {{"kept_l1", r.overlap.kept_l1},
            {"kept_l2", r.overlap.kept_l2},
            {"coverage_l1", r.overlap.coverage_l1},
            {"coverage_l2", r.overlap.coverage_l2},
            {"candidates", candidates}}},
          {"pruned", sizes_list(r.pruned)},
          {"chosen", sizes_json(r.chosen)},
          {"reduction_percent", r.reduction_percent()}};
}

void write_points_csv(std::ostream& out, std::span<const CachePoint> points) {
  out << kCachePointsHeader << '\n';
  for (const auto& p : points) {
    out << p.workload << ',' << p.config.l1 << ',' << p.config.l2 << ',' << p.cycles << ','
        << p.energy.e_t.to_string() << ',' << p.energy.e_td.to_string() << ',' << format_real(p.pp)
        << ',' << format_real(p.es) << '\n';
  }
}

void write_points_csv(std::ostream& out, std::span<const RegfilePoint> points) {
  out << kRegfilePointsHeader << '\n';
  for (const auto& p : points) {
    out << p.workload << ',' << p.config << ',' << p.cycles << ',' << p.energy.e_t.to_string()
        << ',' << p.energy.e_td.to_string() << ',' << format_real(p.pp) << ','
        << format_real(p.es) << '\n';
  }
}

std::vector<CachePoint> read_points_csv(std::istream& in) {
  std::vector<CachePoint> points;
  std::string text;
  std::size_t lineno = 0;
  bool saw_header = false;
  std::set<std::pair<std::string, CacheSizes>> seen;
  while (std::getline(in, text)) {
    ++lineno;
    if (!text.empty() && text.back() == '\r') throw ParseError(lineno, "CR line ending");
    if (!text.empty() && text.front() == '#') continue;
    if (!saw_header) {
      if (text != kCachePointsHeader) {
        throw ParseError(lineno, "expected header '" + std::string(kCachePointsHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    const auto f = split_commas(text);
    if (f.size() != 8) throw ParseError(lineno, "expected 8 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) throw ParseError(lineno, "empty workload name");
    CachePoint p;
    p.workload = std::string(f[0]);
    p.config = {parse_u64(f[1], lineno, "l1"), parse_u64(f[2], lineno, "l2")};
    p.cycles = parse_u64(f[3], lineno, "cycles");
    Energy e_t;
    Energy e_td;
    try {
      e_t = Energy::parse(f[4]);
      e_td = Energy::parse(f[5]);
    } catch (const ParseError& e) {
      throw ParseError(lineno, e.reason());
    }
    if (e_td > e_t) throw ParseError(lineno, "e_td exceeds e_t");
    for (std::size_t i : {6, 7}) {
      double ignored = 0.0;
      const auto [ptr, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), ignored);
      if (f[i].empty() || ec != std::errc{} || ptr != f[i].data() + f[i].size()) {
        throw ParseError(lineno, std::string(i == 6 ? "pp" : "es") + " must be a number");
      }
    }
    if (!seen.emplace(p.workload, p.config).second) {
      throw ParseError(lineno, "duplicate point " + p.workload + " " + to_string(p.config));
    }
    p.energy.e_dr = e_td;
    p.energy.e_td = e_td;
    p.energy.e_ts = e_t - e_td;
    p.energy.e_t = e_t;
    points.push_back(std::move(p));
  }
  if (in.bad()) throw IoError("failed reading points file");
  if (!saw_header) throw ParseError(0, "points file: missing header");
  return points;
}

void write_workloads_csv(std::ostream& out, const DseReport& r) {
  out << "workload,hcp_l1,hcp_l2,lce_l1,lce_l2,range_l1_lo,range_l1_hi,range_l2_lo,range_l2_hi\n";
  for (const auto& w : r.per_workload) {
    out << w.workload << ',' << w.hcp.l1 << ',' << w.hcp.l2 << ',' << w.lce.l1 << ',' << w.lce.l2
        << ',' << w.range_l1.lo << ',' << w.range_l1.hi << ',' << w.range_l2.lo << ','
        << w.range_l2.hi << '\n';
  }
}

void write_candidates_csv(std::ostream& out, const DseReport& r) {
  out << "l1,l2,total_cycles,pp,es,es_dynamic,survived,chosen\n";
  for (const auto& c : r.candidate_metrics) {
    const bool survived = std::find(r.pruned.begin(), r.pruned.end(), c.config) != r.pruned.end();
    out << c.config.l1 << ',' << c.config.l2 << ',' << c.total_cycles << ',' << format_real(c.pp)
        << ',' << format_real(c.es) << ',' << format_real(c.es_dynamic) << ',' << survived << ','
        << (c.config == r.chosen) << '\n';
  }
}

void write_candidates_plot(std::ostream& out, const DseReport& r) {
  out << "# l1_kib l2_kib pp es es_dynamic\n";
  for (const auto& c : r.candidate_metrics) {
    out << c.config.l1 / 1024 << ' ' << c.config.l2 / 1024 << ' ' << format_real(c.pp) << ' '
        << format_real(c.es) << ' ' << format_real(c.es_dynamic) << '\n';
  }
}

void print_dse_summary(std::ostream& out, const ordered_json& r) {
  const auto sizes = [](const ordered_json& s) {
    return to_string(CacheSizes{s.at("l1").get<std::uint64_t>(), s.at("l2").get<std::uint64_t>()});
  };
  out << "workloads: " << r.at("per_workload").size()
      << ", configurations per workload: " << r.at("configs_per_workload").get<std::size_t>() << '\n';
  for (const auto& w : r.at("per_workload")) {
    out << "  " << w.at("workload").get<std::string>() << ": HCP " << sizes(w.at("hcp")) << " LCE "
        << sizes(w.at("lce")) << '\n';
  }
  const auto& candidates = r.at("overlap").at("candidates");
  const auto& pruned = r.at("pruned");
  out << "baseline: " << sizes(r.at("baseline")) << '\n';
  out << "overlap candidates: " << candidates.size() << '\n';
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.0f%%", r.at("reduction_percent").get<double>());
  out << "survivors: " << pruned.size() << " (" << pct << " reduction in search space)\n";
  out << "chosen: " << sizes(r.at("chosen")) << '\n';
}

ordered_json regfile_json(std::span<const RegfilePoint> points, std::span<const RegfileSummary> table,
                          std::uint32_t baseline, std::uint32_t performance_pick,
                          std::uint32_t energy_pick) {
  auto rows = ordered_json::array();
  for (const auto& t : table) {
    rows.push_back({{"regfile", t.config}, {"total_cycles", t.total_cycles}, {"pp", t.pp}, {"es", t.es}});
  }
  auto pts = ordered_json::array();
  for (const auto& p : points) {
    pts.push_back({{"workload", p.workload},
                   {"regfile", p.config},
                   {"cycles", p.cycles},
                   {"e_t", p.energy.e_t.to_double()},
                   {"e_td", p.energy.e_td.to_double()},
                   {"pp", p.pp},
                   {"es", p.es}});
  }
  return {{"baseline", baseline},
          {"table", rows},
          {"points", pts},
          {"performance_pick", performance_pick},
          {"energy_pick", energy_pick}};
}

void write_regfile_table_csv(std::ostream& out, std::span<const RegfileSummary> table) {
  out << "regfile,total_cycles,pp,es\n";
  for (const auto& t : table) {
    out << t.config << ',' << t.total_cycles << ',' << format_real(t.pp) << ',' << format_real(t.es)
        << '\n';
  }
}

void write_regfile_plot(std::ostream& out, std::span<const RegfileSummary> table) {
  out << "# regfile pp es\n";
  for (const auto& t : table) out << t.config << ' ' << format_real(t.pp) << ' ' << format_real(t.es) << '\n';
}

ordered_json to_json(const ScalingReport& r) {
  auto steps = ordered_json::array();
  for (const auto& s : r.steps) {
    ordered_json improvement;
    for (const auto& [name, value] : s.improvement) improvement[name] = value;
    steps.push_back({{"threads", s.threads},
                     {"sequential_cycles", s.sequential_cycles},
                     {"smt_cycles", s.smt_cycles},
                     {"speedup", s.speedup},
                     {"improvement", improvement}});
  }
  return {{"steps", steps}, {"max_supported_threads", r.max_supported_threads}};
}

void write_scaling_csv(std::ostream& out, const ScalingReport& r) {
  out << "threads,sequential_cycles,smt_cycles,speedup";
  if (!r.steps.empty()) {
    for (const auto& [name, value] : r.steps.front().improvement) out << ",improvement_" << name;
  }
  out << '\n';
  for (const auto& s : r.steps) {
    out << s.threads << ',' << s.sequential_cycles << ',' << s.smt_cycles << ',' << format_real(s.speedup);
    for (const auto& [name, value] : s.improvement) out << ',' << format_real(value);
    out << '\n';
  }
}

void write_scaling_plot(std::ostream& out, const ScalingReport& r) {
  out << "# threads speedup\n";
  for (const auto& s : r.steps) out << s.threads << ' ' << format_real(s.speedup) << '\n';
}

}  // namespace cachescape
