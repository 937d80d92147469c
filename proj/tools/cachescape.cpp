// cachescape command-line front end.
//
// Exit codes: 0 success, 1 validation/parse error, 2 runtime contract
// violation, 3 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cachescape/cache.hpp"
#include "cachescape/dse.hpp"
#include "cachescape/energy.hpp"
#include "cachescape/error.hpp"
#include "cachescape/report_io.hpp"
#include "cachescape/smt.hpp"
#include "cachescape/trace.hpp"
#include "cachescape/workload.hpp"

namespace fs = std::filesystem;
using namespace cachescape;

namespace {

struct GlobalArgs {
  std::string out_dir = ".";
  std::vector<std::string> formats;
  unsigned jobs = 1;

  bool wants(std::string_view format) const {
    if (formats.empty()) return format == "json" || format == "csv";
    return std::find(formats.begin(), formats.end(), format) != formats.end();
  }
};

struct WorkloadArgs {
  std::vector<std::string> traces;
  std::vector<std::string> profiles;
};

struct GeometryArgs {
  std::string energy_table;
  std::uint32_t l1_assoc = 4;
  std::uint32_t l2_assoc = 8;
  std::uint64_t l1_line = 64;
  std::uint64_t l2_line = 64;
};

struct CoreArgs {
  std::uint32_t fetch_width = 2;
  std::uint32_t regfile = 80;
  std::uint32_t commit_latency = 16;

  CoreConfig core() const { return CoreConfig{fetch_width, regfile, commit_latency, 1}; }
};

void add_workload_options(CLI::App* cmd, WorkloadArgs& args) {
  cmd->add_option("--trace", args.traces, "Trace file (repeatable)");
  cmd->add_option("--workload", args.profiles,
                  "Synthetic workload profile, e.g. name=a,iws=8K,dws=24K,alpha=1.2,length=50000 (repeatable)");
}

void add_geometry_options(CLI::App* cmd, GeometryArgs& args) {
  cmd->add_option("--energy-table", args.energy_table, "Energy table CSV (default: bundled fixture table)");
  cmd->add_option("--l1-assoc", args.l1_assoc, "L1I/L1D associativity");
  cmd->add_option("--l2-assoc", args.l2_assoc, "L2 associativity");
  cmd->add_option("--l1-line", args.l1_line, "L1I/L1D line size in bytes");
  cmd->add_option("--l2-line", args.l2_line, "L2 line size in bytes");
}

void add_core_options(CLI::App* cmd, CoreArgs& args) {
  cmd->add_option("--fetch-width", args.fetch_width, "Instructions fetched per cycle");
  cmd->add_option("--regfile", args.regfile, "Physical registers");
  cmd->add_option("--commit-latency", args.commit_latency,
                  "Cycles a destination register is held after its accesses complete");
}

EnergyTable load_table(const std::string& path) {
  return path.empty() ? default_energy_table() : read_energy_table_file(path);
}

// Parses every trace and generates every profile before any simulation runs.
std::vector<Trace> load_workloads(const WorkloadArgs& args) {
  std::vector<Trace> out;
  for (const auto& path : args.traces) out.push_back(read_trace_file(path));
  std::vector<WorkloadProfile> profiles;
  for (const auto& spec : args.profiles) profiles.push_back(parse_profile(spec));
  for (const auto& p : profiles) out.push_back(generate_trace(p));
  if (out.empty()) throw ValidationError("no workloads: pass --trace or --workload");
  return out;
}

std::vector<std::uint64_t> parse_sizes(const std::vector<std::string>& texts) {
  std::vector<std::uint64_t> out;
  for (const auto& t : texts) out.push_back(parse_size(t));
  return out;
}

SweepGrid make_grid(const GeometryArgs& g, const std::vector<std::uint64_t>& l1,
                    const std::vector<std::uint64_t>& l2, bool l1_le_l2) {
  SweepGrid grid;
  grid.l1_sizes = l1;
  grid.l2_sizes = l2;
  grid.l1i = {g.l1_assoc, g.l1_line};
  grid.l1d = {g.l1_assoc, g.l1_line};
  grid.l2 = {g.l2_assoc, g.l2_line};
  grid.l1_le_l2 = l1_le_l2;
  validate(grid);
  return grid;
}

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) const {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }

  void write_json(const std::string& name, const nlohmann::ordered_json& json) const {
    write(name, [&](std::ostream& out) { out << json.dump(2) << '\n'; });
  }

 private:
  fs::path dir_;
};

int run_gen(const WorkloadProfile& profile, const std::string& output) {
  const Trace trace = generate_trace(profile);
  write_trace_file(trace, output);
  std::cout << "wrote " << output << " (" << trace.size() << " records)\n";
  return 0;
}

struct SimulateArgs {
  std::string trace;
  GeometryArgs geometry;
  std::string l1_size = "32K";
  std::string l1i_size;
  std::string l1d_size;
  std::string l2_size = "64K";
  std::uint32_t l1i_latency = 0;
  std::uint32_t l1d_latency = 0;
  std::uint32_t l2_latency = 0;
  std::uint32_t mem_latency = 0;
};

int run_simulate(const GlobalArgs& global, const SimulateArgs& args) {
  const Trace trace = read_trace_file(args.trace);
  const EnergyTable table = load_table(args.geometry.energy_table);
  const auto& g = args.geometry;
  HierarchyConfig h;
  h.l1i = {Level::L1I, parse_size(args.l1i_size.empty() ? args.l1_size : args.l1i_size), g.l1_line, g.l1_assoc, 1};
  h.l1d = {Level::L1D, parse_size(args.l1d_size.empty() ? args.l1_size : args.l1d_size), g.l1_line, g.l1_assoc, 1};
  h.l2 = {Level::L2, parse_size(args.l2_size), g.l2_line, g.l2_assoc, 1};
  validate(h.l1i);
  validate(h.l1d);
  validate(h.l2);
  const auto pick = [](std::uint32_t flag, std::uint32_t from_table) { return flag != 0 ? flag : from_table; };
  h.l1i.access_latency = pick(args.l1i_latency, table.lookup(h.l1i).access_latency);
  h.l1d.access_latency = pick(args.l1d_latency, table.lookup(h.l1d).access_latency);
  h.l2.access_latency = pick(args.l2_latency, table.lookup(h.l2).access_latency);
  h.mem_latency = pick(args.mem_latency, table.memory().access_latency);
  validate(h);

  const SimStats stats = simulate(h, trace);
  const EnergyReport energy = total_energy(stats, table, h);

  const OutputDir out(global.out_dir);
  if (global.wants("json")) out.write_json("simulate.json", simulation_json(trace.name, h, stats, energy));
  if (global.wants("csv")) {
    out.write("simulate.csv", [&](std::ostream& os) { write_simulation_csv(os, stats, energy); });
  }
  std::cout << trace.name << ": " << stats.instructions_retired << " instructions, "
            << stats.total_cycles << " cycles, E_t " << energy.e_t.to_string() << " (E_td "
            << energy.e_td.to_string() << ", E_ts " << energy.e_ts.to_string() << ")\n";
  return 0;
}

struct DseArgs {
  WorkloadArgs workloads;
  GeometryArgs geometry;
  CoreArgs core;
  std::string points;
  std::vector<std::string> l1_sizes = {"8K", "16K", "32K", "64K", "128K", "256K"};
  std::vector<std::string> l2_sizes = {"16K", "32K", "64K", "128K", "256K", "512K"};
  bool l1_le_l2 = false;
  std::string baseline_l1 = "32K";
  std::string baseline_l2 = "64K";
  double pp_tolerance = kDefaultPpTolerance;
};

void emit_dse(const GlobalArgs& global, const DseReport& report) {
  const auto json = to_json(report);
  const OutputDir out(global.out_dir);
  if (global.wants("json")) out.write_json("dse_report.json", json);
  if (global.wants("csv")) {
    out.write("dse_points.csv", [&](std::ostream& os) { write_points_csv(os, report.points); });
    out.write("dse_workloads.csv", [&](std::ostream& os) { write_workloads_csv(os, report); });
    out.write("dse_candidates.csv", [&](std::ostream& os) { write_candidates_csv(os, report); });
  }
  if (global.wants("plotdata")) {
    out.write("dse_candidates.dat", [&](std::ostream& os) { write_candidates_plot(os, report); });
  }
  print_dse_summary(std::cout, json);
}

int run_dse(const GlobalArgs& global, const DseArgs& args) {
  const SweepGrid grid =
      make_grid(args.geometry, parse_sizes(args.l1_sizes), parse_sizes(args.l2_sizes), args.l1_le_l2);
  const CacheSizes baseline{parse_size(args.baseline_l1), parse_size(args.baseline_l2)};

  if (!args.points.empty()) {
    std::ifstream in(args.points, std::ios::binary);
    if (!in) throw IoError("cannot open points file '" + args.points + "'");
    std::vector<CachePoint> points;
    try {
      points = read_points_csv(in);
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.reason(), args.points);
    }
    emit_dse(global, explore_cache(std::move(points), grid, baseline, args.pp_tolerance));
    return 0;
  }

  const auto workloads = load_workloads(args.workloads);
  EnergyTable table = load_table(args.geometry.energy_table);
  check_table_coverage(grid, table);
  Explorer explorer(grid, std::move(table), args.core.core());
  explorer.set_baseline(baseline);
  explorer.set_jobs(global.jobs);
  auto points = explorer.sweep_cache(workloads);
  if (global.wants("csv")) {
    // Written before selection so a failed choice still leaves the evaluated points behind.
    OutputDir(global.out_dir).write("dse_points.csv", [&](std::ostream& os) { write_points_csv(os, points); });
  }
  emit_dse(global, explore_cache(std::move(points), grid, baseline, args.pp_tolerance));
  return 0;
}

struct RegfileArgs {
  WorkloadArgs workloads;
  GeometryArgs geometry;
  CoreArgs core;
  std::string l1_size = "16K";
  std::string l2_size = "64K";
  std::vector<std::uint32_t> sizes = {48, 56, 64, 72, 80, 88, 96};
  std::uint32_t baseline = kDefaultRegfileBaseline;
};

HierarchyConfig chosen_hierarchy(const GeometryArgs& g, const std::string& l1, const std::string& l2,
                                 const EnergyTable& table) {
  const auto grid = make_grid(g, {parse_size(l1)}, {parse_size(l2)}, false);
  return make_hierarchy(grid, {parse_size(l1), parse_size(l2)}, table);
}

int run_regfile(const GlobalArgs& global, const RegfileArgs& args) {
  const auto workloads = load_workloads(args.workloads);
  const EnergyTable table = load_table(args.geometry.energy_table);
  const HierarchyConfig h = chosen_hierarchy(args.geometry, args.l1_size, args.l2_size, table);
  const CoreConfig core = args.core.core();
  for (auto size : args.sizes) {
    CoreConfig c = core;
    c.regfile_size = size;
    validate(c);
  }

  const auto points = sweep_regfile(args.sizes, core, h, table, workloads, args.baseline, global.jobs);
  const auto summary = average_points(std::span<const RegfilePoint>(points));
  const auto perf = select_regfile(summary, RegfileObjective::Performance);
  const auto energy = select_regfile(summary, RegfileObjective::Energy);

  const OutputDir out(global.out_dir);
  if (global.wants("json")) out.write_json("regfile.json", regfile_json(points, summary, args.baseline, perf, energy));
  if (global.wants("csv")) {
    out.write("regfile_table.csv", [&](std::ostream& os) { write_regfile_table_csv(os, summary); });
    out.write("regfile_points.csv", [&](std::ostream& os) {
      write_points_csv(os, std::span<const RegfilePoint>(points));
    });
  }
  if (global.wants("plotdata")) {
    out.write("regfile.dat", [&](std::ostream& os) { write_regfile_plot(os, summary); });
  }
  std::cout << "register#  Pp        Es\n";
  for (const auto& row : summary) {
    char line[96];
    std::snprintf(line, sizeof line, "%-9u  %+.2f%%  %+.2f%%\n", row.config, 100.0 * row.pp, 100.0 * row.es);
    std::cout << line;
  }
  std::cout << "performance pick: " << perf << " registers\n"
            << "energy pick: " << energy << " registers\n";
  return 0;
}

struct SmtArgs {
  WorkloadArgs workloads;
  GeometryArgs geometry;
  CoreArgs core{2, 48, 16};
  std::string l1_size = "16K";
  std::string l2_size = "64K";
  unsigned max_threads = 2;
};

int run_smt_cmd(const GlobalArgs& global, const SmtArgs& args) {
  const auto workloads = load_workloads(args.workloads);
  const EnergyTable table = load_table(args.geometry.energy_table);
  const HierarchyConfig h = chosen_hierarchy(args.geometry, args.l1_size, args.l2_size, table);
  const ScalingReport report = thread_scaling(args.core.core(), h, workloads, args.max_threads, global.jobs);

  const OutputDir out(global.out_dir);
  if (global.wants("json")) out.write_json("smt.json", to_json(report));
  if (global.wants("csv")) out.write("smt_scaling.csv", [&](std::ostream& os) { write_scaling_csv(os, report); });
  if (global.wants("plotdata")) {
    out.write("smt_scaling.dat", [&](std::ostream& os) { write_scaling_plot(os, report); });
  }
  for (const auto& step : report.steps) {
    std::cout << "threads " << step.threads << ": speedup " << format_real(step.speedup) << '\n';
  }
  std::cout << "max supported threads: " << report.max_supported_threads << '\n';
  return 0;
}

int run_report(const GlobalArgs& global, const std::string& input) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw IoError("cannot open report '" + input + "'");
  nlohmann::ordered_json json;
  try {
    json = nlohmann::ordered_json::parse(in);
    print_dse_summary(std::cout, json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("not a dse report: ") + e.what(), input);
  }
  if (global.wants("plotdata")) {
    const OutputDir out(global.out_dir);
    out.write("dse_candidates.dat", [&](std::ostream& os) {
      os << "# l1_kib l2_kib pp es es_dynamic\n";
      for (const auto& c : json.at("overlap").at("candidates")) {
        os << c.at("l1").get<std::uint64_t>() / 1024 << ' ' << c.at("l2").get<std::uint64_t>() / 1024 << ' '
           << format_real(c.at("pp").get<double>()) << ' ' << format_real(c.at("es").get<double>()) << ' '
           << format_real(c.at("es_dynamic").get<double>()) << '\n';
      }
    });
  }
  return 0;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const ValidationError*>(&e) != nullptr || dynamic_cast<const ParseError*>(&e) != nullptr ||
      dynamic_cast<const LookupError*>(&e) != nullptr) {
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cachescape: cache hierarchy, register file and SMT design space exploration"};
  app.set_config("--config", "", "INI config file; [section] names match subcommands");
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs global;
  app.add_option("--out", global.out_dir, "Output directory");
  app.add_option("--format", global.formats, "Output format (repeatable): json, csv, plotdata")
      ->check(CLI::IsMember({"json", "csv", "plotdata"}));
  app.add_option("--jobs", global.jobs, "Parallel evaluations (0 = all cores)");

  WorkloadProfile profile;
  std::string profile_iws = "16K";
  std::string profile_dws = "16K";
  std::string gen_output;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic trace file");
  gen->add_option("-o,--output", gen_output, "Trace file to write")->required();
  gen->add_option("--name", profile.name, "Trace name");
  gen->add_option("--instr-ws", profile_iws, "Instruction working set (e.g. 16K)");
  gen->add_option("--data-ws", profile_dws, "Data working set (e.g. 24K)");
  gen->add_option("--load", profile.load_fraction, "Load fraction");
  gen->add_option("--store", profile.store_fraction, "Store fraction");
  gen->add_option("--alpha", profile.locality_alpha, "Reuse-distance skew (> 0)");
  gen->add_option("--length", profile.length, "Number of records");
  gen->add_option("--seed", profile.seed, "Generator seed");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one trace and report counters and energy");
  simulate_cmd->add_option("--trace", sim.trace, "Trace file")->required();
  add_geometry_options(simulate_cmd, sim.geometry);
  simulate_cmd->add_option("--l1-size", sim.l1_size, "Size of both L1 caches");
  simulate_cmd->add_option("--l1i-size", sim.l1i_size, "L1I size (overrides --l1-size)");
  simulate_cmd->add_option("--l1d-size", sim.l1d_size, "L1D size (overrides --l1-size)");
  simulate_cmd->add_option("--l2-size", sim.l2_size, "L2 size");
  simulate_cmd->add_option("--l1i-latency", sim.l1i_latency, "Override table latency (cycles)");
  simulate_cmd->add_option("--l1d-latency", sim.l1d_latency, "Override table latency (cycles)");
  simulate_cmd->add_option("--l2-latency", sim.l2_latency, "Override table latency (cycles)");
  simulate_cmd->add_option("--mem-latency", sim.mem_latency, "Override table latency (cycles)");

  DseArgs dse;
  auto* dse_cmd = app.add_subcommand("dse", "Cache sweep, HCP/LCE ranges, overlap, pruning and choice");
  add_workload_options(dse_cmd, dse.workloads);
  add_geometry_options(dse_cmd, dse.geometry);
  add_core_options(dse_cmd, dse.core);
  dse_cmd->add_option("--points", dse.points, "Replay an evaluated points CSV instead of simulating");
  dse_cmd->add_option("--l1-sizes", dse.l1_sizes, "L1 sizes to sweep");
  dse_cmd->add_option("--l2-sizes", dse.l2_sizes, "L2 sizes to sweep");
  dse_cmd->add_flag("--l1-le-l2", dse.l1_le_l2, "Skip configurations with L1 larger than L2");
  dse_cmd->add_option("--baseline-l1", dse.baseline_l1, "Baseline L1 size for Pp/Es");
  dse_cmd->add_option("--baseline-l2", dse.baseline_l2, "Baseline L2 size for Pp/Es");
  dse_cmd->add_option("--pp-tolerance", dse.pp_tolerance, "Tolerated mean performance penalty");

  RegfileArgs rf;
  auto* rf_cmd = app.add_subcommand("regfile", "Register file size sweep on a fixed cache configuration");
  add_workload_options(rf_cmd, rf.workloads);
  add_geometry_options(rf_cmd, rf.geometry);
  add_core_options(rf_cmd, rf.core);
  rf_cmd->add_option("--l1-size", rf.l1_size, "Fixed L1 size");
  rf_cmd->add_option("--l2-size", rf.l2_size, "Fixed L2 size");
  rf_cmd->add_option("--sizes", rf.sizes, "Register file sizes to sweep");
  rf_cmd->add_option("--baseline-regs", rf.baseline, "Register count every Pp/Es is relative to");

  SmtArgs smt;
  auto* smt_cmd = app.add_subcommand("smt", "Thread scaling on the shared-everything SMT core");
  add_workload_options(smt_cmd, smt.workloads);
  add_geometry_options(smt_cmd, smt.geometry);
  add_core_options(smt_cmd, smt.core);
  smt_cmd->add_option("--l1-size", smt.l1_size, "Fixed L1 size");
  smt_cmd->add_option("--l2-size", smt.l2_size, "Fixed L2 size");
  smt_cmd->add_option("--max-threads", smt.max_threads, "Largest thread count to run");

  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "Summarize a dse_report.json");
  report_cmd->add_option("--in", report_in, "dse_report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      profile.instr_working_set = parse_size(profile_iws);
      profile.data_working_set = parse_size(profile_dws);
      return run_gen(profile, gen_output);
    }
    if (*simulate_cmd) return run_simulate(global, sim);
    if (*dse_cmd) return run_dse(global, dse);
    if (*rf_cmd) return run_regfile(global, rf);
    if (*smt_cmd) return run_smt_cmd(global, smt);
    if (*report_cmd) return run_report(global, report_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return 0;
}
