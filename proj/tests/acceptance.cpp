// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cachescape/cache.hpp"
#include "cachescape/dse.hpp"
#include "cachescape/energy.hpp"
#include "cachescape/report_io.hpp"
#include "cachescape/smt.hpp"
#include "cachescape/workload.hpp"
#include "support.hpp"

using namespace cachescape;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t K = 1024;

// Pinned budgets.
constexpr int kOracleCases = 1000;
constexpr std::size_t kOracleMaxRecords = 10'000;
constexpr double kOracleSeconds = 60.0;
constexpr int kEnergyCases = 100;
constexpr int kStackTraces = 200;
constexpr double kFixtureSeconds = 120.0;
constexpr std::size_t kThroughputRecords = 100'000;
constexpr double kThroughputSeconds = 1.0;
constexpr double kSweepSeconds = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string command = std::string("'") + CACHESCAPE_CLI + "' " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cachescape_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const fs::path kDemo = testing::data_dir() / "demo.ini";
const fs::path kFixtures = testing::data_dir() / "fixtures";

SweepGrid demo_grid() {
  SweepGrid g;
  g.l1_sizes = {8 * K, 16 * K, 32 * K, 64 * K, 128 * K, 256 * K};
  g.l2_sizes = {16 * K, 32 * K, 64 * K, 128 * K, 256 * K, 512 * K};
  validate(g);
  return g;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(1001);
  const auto start = Clock::now();
  int mismatches = 0;
  for (int i = 0; i < kOracleCases; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const Trace t = testing::random_trace(rng, 1 + rng() % kOracleMaxRecords);
    if (simulate(h, t) != reference_simulate(h, t)) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  o.require(mismatches == 0, std::to_string(mismatches) + " mismatching cases");
  o.require(elapsed < kOracleSeconds, "took " + std::to_string(elapsed) + " s");
  if (o.pass) o.detail = std::to_string(kOracleCases) + " cases in " + format_real(elapsed) + " s";
  return o;
}

Outcome energy_identities() {
  Outcome o;
  std::mt19937_64 rng(1002);
  int broken = 0;
  for (int i = 0; i < kEnergyCases; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const SimStats s = testing::random_stats(rng);
    const EnergyReport r = total_energy(s, testing::random_table(rng, h), h);
    if (r.e_t != r.e_td + r.e_ts || r.e_td != r.e_dr + r.e_dw) ++broken;
  }
  o.require(broken == 0, std::to_string(broken) + " cases break an identity");
  if (o.pass) o.detail = std::to_string(kEnergyCases) + " cases, exact";
  return o;
}

Outcome static_formula() {
  Outcome o;
  LevelStats l;
  l.n_miss = 2;
  l.idle_cycles = 10;
  EnergyParams p;
  p.e_static_per_access = Energy::parse("0.5");
  const Energy e = static_energy_level(l, p, 4);
  o.require(e == Energy::parse("24"), "got " + e.to_string());
  if (o.pass) o.detail = "(2 + 10) * 0.5 * 4 = " + e.to_string();
  return o;
}

Outcome lru_stack() {
  Outcome o;
  std::mt19937_64 rng(1004);
  int violations = 0;
  for (int i = 0; i < kStackTraces; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const Trace t = testing::random_trace(rng, 1 + rng() % 3000);
    const SimStats base = simulate(h, t);
    for (Level level : kLevels) {
      HierarchyConfig wider = h;
      CacheConfig& c = level == Level::L1I ? wider.l1i : level == Level::L1D ? wider.l1d : wider.l2;
      c.associativity *= 2;
      c.size *= 2;
      if (simulate(wider, t).at(level).n_miss > base.at(level).n_miss) ++violations;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " levels gained misses");
  if (o.pass) o.detail = std::to_string(kStackTraces) + " traces, 3 levels each";
  return o;
}

Outcome selection_structure() {
  Outcome o;
  const auto start = Clock::now();

  // Sweep shape on simulated workloads.
  std::vector<Trace> workloads;
  for (std::uint64_t seed : {1, 2}) {
    WorkloadProfile p;
    p.name = "w" + std::to_string(seed);
    p.length = 5000;
    p.seed = seed;
    workloads.push_back(generate_trace(p));
  }
  const auto points = sweep_cache(demo_grid(), workloads, default_energy_table(), CoreConfig{}, kDefaultCacheBaseline);
  for (const auto& w : workloads) {
    const auto n = std::count_if(points.begin(), points.end(), [&](const auto& p) { return p.workload == w.name; });
    o.require(n == 36, w.name + " has " + std::to_string(n) + " points");
  }

  // Overlap and pruning on the bundled points.
  std::ifstream in(kFixtures / "selection_points.csv");
  const DseReport r = explore_cache(read_points_csv(in), demo_grid(), kDefaultCacheBaseline);
  o.require(r.configs_per_workload() == 36, "fixture has " + std::to_string(r.configs_per_workload()) + " configs");
  o.require(r.overlap.kept_l1 == std::vector<std::uint64_t>{16 * K, 32 * K, 64 * K, 128 * K}, "kept L1 sizes differ");
  o.require(r.overlap.kept_l2 == std::vector<std::uint64_t>{32 * K, 64 * K, 128 * K}, "kept L2 sizes differ");
  o.require(r.overlap.candidates.size() == 12, std::to_string(r.overlap.candidates.size()) + " candidates");
  o.require(r.pruned.size() == 5, std::to_string(r.pruned.size()) + " survivors");

  const CliResult cli = run_cli("--out " + q(scratch("selection")) + " dse --points " + q(kFixtures / "selection_points.csv"));
  o.require(cli.code == 0, "cli exit " + std::to_string(cli.code));
  o.require(cli.output.find("58% reduction") != std::string::npos, "cli did not print 58%");

  const double elapsed = seconds_since(start);
  o.require(elapsed < kFixtureSeconds, "took " + std::to_string(elapsed) + " s");
  if (o.pass) o.detail = "36 per workload, 12 candidates, 5 survivors, 58%";
  return o;
}

Outcome regfile_behavior() {
  Outcome o;
  const fs::path dir = scratch("regfile");
  const CliResult cli = run_cli("--config " + q(kDemo) + " --out " + q(dir) + " --format json regfile");
  o.require(cli.code == 0, "cli exit " + std::to_string(cli.code) + ": " + cli.output);
  if (!o.pass) return o;
  const auto json = nlohmann::json::parse(slurp(dir / "regfile.json"));
  const auto& table = json.at("table");
  const std::vector<std::uint32_t> expected{48, 56, 64, 72, 80, 88, 96};
  o.require(table.size() == expected.size(), "table has " + std::to_string(table.size()) + " rows");
  if (!o.pass) return o;
  std::uint64_t best = table.back().at("total_cycles");
  std::uint32_t plateau = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    o.require(row.at("regfile") == expected[i], "unexpected size order");
    if (i > 0) {
      o.require(row.at("total_cycles").get<std::uint64_t>() <= table[i - 1].at("total_cycles").get<std::uint64_t>(),
                "cycles rise at " + std::to_string(expected[i]));
    }
    if (plateau == 0 && row.at("total_cycles") == best) plateau = expected[i];
    if (row.at("regfile") == 80) {
      o.require(row.at("pp").get<double>() == 0.0 && row.at("es").get<double>() == 0.0, "baseline row is not 0/0");
    }
  }
  o.require(json.at("performance_pick") == plateau, "performance pick is not the first plateau size");
  if (o.pass) o.detail = "non-increasing, plateau at " + std::to_string(plateau) + ", baseline 0/0";
  return o;
}

Outcome smt_behavior() {
  Outcome o;
  std::mt19937_64 rng(1007);
  int diverging = 0;
  for (int i = 0; i < 50; ++i) {
    const HierarchyConfig h = testing::random_hierarchy(rng);
    const Trace t = testing::random_trace(rng, 1 + rng() % 2000);
    const CoreConfig core{static_cast<std::uint32_t>(1 + rng() % 4), static_cast<std::uint32_t>(4 + rng() % 64),
                          static_cast<std::uint32_t>(1 + rng() % 32), 1};
    const SmtStats single = run_single(core, h, t);
    if (run_smt(core, h, std::span<const Trace>(&t, 1)) != single) ++diverging;
    // Timing differs from simulate, cache traffic must not.
    SimStats traffic = single.underlying;
    const SimStats plain = simulate(h, t);
    traffic.total_cycles = plain.total_cycles;
    for (Level level : kLevels) traffic.at(level).idle_cycles = plain.at(level).idle_cycles;
    if (traffic != plain) ++diverging;
  }
  o.require(diverging == 0, std::to_string(diverging) + " one-thread runs diverge");

  const EnergyTable table = default_energy_table();
  SweepGrid g;
  g.l1_sizes = {16 * K};
  g.l2_sizes = {64 * K};
  validate(g);
  const HierarchyConfig h = make_hierarchy(g, {16 * K, 64 * K}, table);
  const std::vector<Trace> compute{read_trace_file(kFixtures / "compute_a.trace"),
                                   read_trace_file(kFixtures / "compute_b.trace")};
  const ScalingReport scaling = thread_scaling(CoreConfig{2, 48, 16, 1}, h, compute, 2);
  const double speedup = scaling.steps.at(1).speedup;
  o.require(speedup > 1.0, "speedup(2) = " + format_real(speedup));
  if (o.pass) o.detail = "degenerate on 50 cases, speedup(2) = " + format_real(speedup);
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path one = scratch("jobs1");
  const fs::path eight = scratch("jobs8");
  const std::string args = " --format json --format csv --format plotdata --config " + q(kDemo) + " dse";
  const CliResult a = run_cli("--jobs 1 --out " + q(one) + args);
  const CliResult b = run_cli("--jobs 8 --out " + q(eight) + args);
  o.require(a.code == 0 && b.code == 0, "cli exits " + std::to_string(a.code) + "/" + std::to_string(b.code));
  o.require(a.output == b.output, "console output differs");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(one)) {
    ++files;
    const fs::path other = eight / entry.path().filename();
    o.require(fs::exists(other) && slurp(entry.path()) == slurp(other),
              entry.path().filename().string() + " differs");
  }
  o.require(files == 5, std::to_string(files) + " report files");
  if (o.pass) o.detail = std::to_string(files) + " files byte-identical";
  return o;
}

Outcome throughput() {
  Outcome o;
  WorkloadProfile p;
  p.length = kThroughputRecords;
  const Trace t = generate_trace(p);
  HierarchyConfig h;
  auto start = Clock::now();
  const SimStats s = simulate(h, t);
  const double sim = seconds_since(start);
  o.require(s.instructions_retired == kThroughputRecords, "not every record retired");
  o.require(sim < kThroughputSeconds, "simulate took " + std::to_string(sim) + " s");

  const fs::path dir = scratch("sweep");
  start = Clock::now();
  const CliResult cli = run_cli("--jobs 1 --format csv --config " + q(kDemo) + " --out " + q(dir) + " dse");
  const double sweep = seconds_since(start);
  o.require(cli.code == 0, "dse exit " + std::to_string(cli.code));
  std::ifstream in(dir / "dse_points.csv");
  const auto points = read_points_csv(in);
  o.require(points.size() == 36 * 6, std::to_string(points.size()) + " points");
  o.require(sweep < kSweepSeconds, "sweep took " + std::to_string(sweep) + " s");
  if (o.pass) {
    o.detail = "1e5 records in " + format_real(sim) + " s, 216-point sweep in " + format_real(sweep) + " s";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"energy identities", energy_identities},
      {"static energy formula", static_formula},
      {"LRU stack property", lru_stack},
      {"sweep shape, overlap and pruning fixture", selection_structure},
      {"register-file behavior", regfile_behavior},
      {"SMT degeneracy and gain", smt_behavior},
      {"determinism across job counts", determinism},
      {"throughput", throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << i + 1 << ' ' << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
