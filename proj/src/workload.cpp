#include "cachescape/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cachescape/error.hpp"

namespace cachescape {

namespace {

constexpr std::uint64_t kBlockBytes = 64;
constexpr std::uint64_t kInstrBytes = 4;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64's output sequence is fixed by the standard; the std
// distributions are not, so the conversions below are done by hand.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

// Draws d in [1, n] with P(d) roughly proportional to d^-alpha (inverse CDF
// of a continuous Pareto truncated to [1, n + 1)).
std::uint64_t draw_depth(Stream& rng, double alpha, std::uint64_t n) {
  const double u = rng.uniform();
  const double top = static_cast<double>(n) + 1.0;
  double x;
  if (std::abs(alpha - 1.0) < 1e-12) {
    x = std::pow(top, u);
  } else {
    const double k = 1.0 - alpha;
    x = std::pow(1.0 - u * (1.0 - std::pow(top, k)), 1.0 / k);
  }
  const auto d = static_cast<std::uint64_t>(x);
  return std::clamp<std::uint64_t>(d, 1, n);
}

// LRU stack over `n` blocks with O(log) access by stack depth. Every block
// owns exactly one marked slot in a Fenwick tree over time; the most recent
// slot is the top of the stack.
class ReuseStack {
 public:
  ReuseStack(std::uint64_t blocks, std::uint64_t accesses, Stream& rng)
      : tree_(blocks + accesses + 1, 0), owner_(blocks + accesses, 0) {
    std::vector<std::uint64_t> order(blocks);
    for (std::uint64_t i = 0; i < blocks; ++i) order[i] = i;
    for (std::uint64_t i = blocks; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::uint64_t t = 0; t < blocks; ++t) place(order[t], t);
    next_ = blocks;
    count_ = blocks;
  }

  // Block at stack depth `depth` (1 = most recent); moves it to the top.
  std::uint64_t touch(std::uint64_t depth) {
    const std::uint64_t pos = find(count_ - depth + 1);
    const std::uint64_t block = owner_[pos];
    add(pos, -1);
    place(block, next_++);
    return block;
  }

 private:
  void place(std::uint64_t block, std::uint64_t t) {
    owner_[t] = block;
    add(t, +1);
  }

  void add(std::uint64_t pos, int delta) {
    for (std::uint64_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  // Smallest position whose prefix count reaches k.
  std::uint64_t find(std::uint64_t k) const {
    std::uint64_t pos = 0;
    std::uint64_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && static_cast<std::uint64_t>(tree_[pos + step]) < k) {
        pos += step;
        k -= static_cast<std::uint64_t>(tree_[pos]);
      }
    }
    return pos;  // 0-based position = 1-based index - 1
  }

  std::vector<std::int64_t> tree_;
  std::vector<std::uint64_t> owner_;
  std::uint64_t next_ = 0;
  std::uint64_t count_ = 0;
};

void check_working_set(std::uint64_t bytes, const char* field) {
  if (bytes < kBlockBytes || bytes % kBlockBytes != 0) {
    throw ValidationError(std::string(field) + " must be a positive multiple of 64 bytes, got " +
                          std::to_string(bytes));
  }
}

void check_fraction(double value, const char* field) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ValidationError(std::string(field) + " must be in [0, 1], got " + std::to_string(value));
  }
}

double parse_real(std::string_view text, const std::string& key) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(key + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_uint(std::string_view text, const std::string& key) {
  std::uint64_t value = 0;
  int base = 10;
  if (text.size() > 2 && text.substr(0, 2) == "0x") {
    text.remove_prefix(2);
    base = 16;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(key + ": not an unsigned integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void validate(const WorkloadProfile& p) {
  if (p.length == 0) throw ValidationError("length must be >= 1");
  check_working_set(p.instr_working_set, "instr_working_set");
  check_working_set(p.data_working_set, "data_working_set");
  check_fraction(p.load_fraction, "load_fraction");
  check_fraction(p.store_fraction, "store_fraction");
  if (p.load_fraction + p.store_fraction > 1.0) {
    throw ValidationError("load_fraction + store_fraction must be <= 1, got " +
                          std::to_string(p.load_fraction + p.store_fraction));
  }
  if (!(p.locality_alpha > 0.0) || !std::isfinite(p.locality_alpha)) {
    throw ValidationError("locality_alpha must be a finite value > 0");
  }
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (p.code_base > kMax - p.instr_working_set) throw ValidationError("code_base overflows");
  if (p.data_base > kMax - p.data_working_set) throw ValidationError("data_base overflows");
}

Trace generate_trace(const WorkloadProfile& p) {
  validate(p);
  std::uint64_t state = p.seed;
  Stream code_rng(splitmix64(state));
  Stream data_rng(splitmix64(state));
  Stream mix_rng(splitmix64(state));

  const std::uint64_t code_blocks = p.instr_working_set / kBlockBytes;
  const std::uint64_t data_blocks = p.data_working_set / kBlockBytes;
  constexpr std::uint64_t kInstrPerBlock = kBlockBytes / kInstrBytes;

  // Upper bounds on the number of stack touches.
  ReuseStack code_stack(code_blocks, p.length, code_rng);
  ReuseStack data_stack(data_blocks, p.length, data_rng);

  Trace trace;
  trace.name = p.name;
  trace.records.reserve(p.length);

  std::uint64_t block = 0;
  std::uint64_t slot = 0;
  std::uint64_t run = 0;  // instructions left in the current basic block
  for (std::uint64_t i = 0; i < p.length; ++i) {
    if (run == 0) {
      block = code_stack.touch(draw_depth(code_rng, p.locality_alpha, code_blocks));
      run = 4 + code_rng.below(kInstrPerBlock - 3);  // 4..16 instructions
      slot = 0;
    }
    TraceRecord rec;
    rec.pc = p.code_base + block * kBlockBytes + slot * kInstrBytes;
    ++slot;
    --run;

    const double u = mix_rng.uniform();
    if (u < p.load_fraction + p.store_fraction) {
      const bool is_load = u < p.load_fraction;
      const std::uint64_t b = data_stack.touch(draw_depth(data_rng, p.locality_alpha, data_blocks));
      const std::uint64_t word = data_rng.below(kBlockBytes / 8);
      rec.mem = MemOp{is_load ? MemKind::Load : MemKind::Store,
                      p.data_base + b * kBlockBytes + word * 8};
      rec.num_src_regs = is_load ? 1 : 2;
      rec.num_dst_regs = is_load ? 1 : 0;
    } else {
      rec.num_src_regs = static_cast<std::uint8_t>(mix_rng.below(3));
      rec.num_dst_regs = mix_rng.uniform() < 0.75 ? 1 : 0;
    }
    trace.records.push_back(rec);
  }
  return trace;
}

WorkloadProfile parse_profile(std::string_view spec) {
  WorkloadProfile p;
  while (!spec.empty()) {
    const std::size_t comma = spec.find(',');
    std::string_view item = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("workload profile: expected key=value, got '" + std::string(item) + "'");
    }
    const std::string key(item.substr(0, eq));
    const std::string_view value = item.substr(eq + 1);
    if (key == "name") {
      p.name = std::string(value);
    } else if (key == "iws" || key == "instr_working_set") {
      p.instr_working_set = parse_size(value);
    } else if (key == "dws" || key == "data_working_set") {
      p.data_working_set = parse_size(value);
    } else if (key == "load" || key == "load_fraction") {
      p.load_fraction = parse_real(value, key);
    } else if (key == "store" || key == "store_fraction") {
      p.store_fraction = parse_real(value, key);
    } else if (key == "alpha" || key == "locality_alpha") {
      p.locality_alpha = parse_real(value, key);
    } else if (key == "length") {
      p.length = parse_uint(value, key);
    } else if (key == "seed") {
      p.seed = parse_uint(value, key);
    } else if (key == "code_base") {
      p.code_base = parse_uint(value, key);
    } else if (key == "data_base") {
      p.data_base = parse_uint(value, key);
    } else {
      throw ValidationError("workload profile: unknown key '" + key + "'");
    }
  }
  validate(p);
  return p;
}

std::uint64_t parse_size(std::string_view text) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr == text.data()) {
    throw ValidationError("not a size: '" + std::string(text) + "'");
  }
  std::string suffix(ptr, text.data() + text.size());
  for (auto& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::uint64_t scale = 1;
  if (suffix == "K" || suffix == "KB") {
    scale = 1024;
  } else if (suffix == "M" || suffix == "MB") {
    scale = 1024 * 1024;
  } else if (!suffix.empty() && suffix != "B") {
    throw ValidationError("not a size: '" + std::string(text) + "'");
  }
  if (value > std::numeric_limits<std::uint64_t>::max() / scale) {
    throw ValidationError("size overflows: '" + std::string(text) + "'");
  }
  return value * scale;
}

std::string format_size(std::uint64_t bytes) {
  constexpr std::uint64_t kKi = 1024;
  constexpr std::uint64_t kMi = 1024 * 1024;
  if (bytes != 0 && bytes % kMi == 0) return std::to_string(bytes / kMi) + "M";
  if (bytes != 0 && bytes % kKi == 0) return std::to_string(bytes / kKi) + "K";
  return std::to_string(bytes);
}

}  // namespace cachescape
