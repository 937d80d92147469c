#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cachescape/trace.hpp"

namespace cachescape {

// Knobs of the synthetic workload generator.
//
// Data references follow a power-law reuse model: with probability
// P(k >= r) = r^-locality_alpha the access repeats the block touched k
// references ago, otherwise a fresh block is drawn uniformly from the data
// working set. Instruction fetch walks the code region sequentially with
// backward loop branches whose targets are picked with the same skew.
struct WorkloadProfile {
  std::string name = "synthetic";
  std::uint64_t instr_working_set = 16 * 1024;  // bytes, multiple of 64
  std::uint64_t data_working_set = 16 * 1024;   // bytes, multiple of 64
  double load_fraction = 0.25;
  double store_fraction = 0.10;
  double locality_alpha = 1.5;
  std::uint64_t length = 10000;
  std::uint64_t seed = 1;
  std::uint64_t code_base = 0x400000;
  std::uint64_t data_base = 0x10000000;
};

// Throws ValidationError naming the first offending field.
void validate(const WorkloadProfile& profile);

// Deterministic in the whole profile (including seed). All records carry
// thread id 0.
Trace generate_trace(const WorkloadProfile& profile);

// Parses `key=value` pairs separated by commas, e.g.
// "name=route,iws=8K,dws=24K,load=0.3,store=0.1,alpha=1.2,length=50000,seed=7".
// Unset keys keep their defaults.
WorkloadProfile parse_profile(std::string_view spec);

// "16K" -> 16384, "1M" -> 1048576, "4096" -> 4096. KB/MB suffixes accepted.
std::uint64_t parse_size(std::string_view text);

// Inverse of parse_size for sizes that are whole KiB/MiB ("16K", "1M").
std::string format_size(std::uint64_t bytes);

}  // namespace cachescape
