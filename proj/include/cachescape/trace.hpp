#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cachescape {

enum class MemKind : std::uint8_t { Load, Store };

struct MemOp {
  MemKind kind = MemKind::Load;
  std::uint64_t address = 0;

  friend bool operator==(const MemOp&, const MemOp&) = default;
};

// One dynamic instruction. Every record is fetched through L1I at `pc`;
// `mem` is the optional data access through L1D.
struct TraceRecord {
  std::uint16_t thread_id = 0;
  std::uint64_t pc = 0;
  std::optional<MemOp> mem;
  std::uint8_t num_src_regs = 0;  // [0, 3]
  std::uint8_t num_dst_regs = 0;  // [0, 1]

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline constexpr std::uint8_t kMaxSrcRegs = 3;
inline constexpr std::uint8_t kMaxDstRegs = 1;

// Records are in program order. Per-thread subsequences keep their order
// when several thread ids are interleaved.
struct Trace {
  std::string name;
  std::vector<TraceRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

inline constexpr std::string_view kTraceHeader = "#cachescape-trace v1";

/// Parses the line-oriented trace text format. Throws ParseError carrying the
/// 1-based line number of the first malformed line.
Trace read_trace(std::istream& in, std::string name = {});

/// Reads a trace file; the trace name is the file stem.
Trace read_trace_file(const std::filesystem::path& path);

void write_trace(const Trace& trace, std::ostream& out);
void write_trace_file(const Trace& trace, const std::filesystem::path& path);

// True when every record carries the same thread id (vacuously for empty).
bool is_single_thread(const Trace& trace);

// Copy of `trace` retagged to `thread_id` with every pc and data address
// shifted by `offset` bytes. Used to give SMT threads disjoint footprints.
Trace relocate(const Trace& trace, std::uint16_t thread_id, std::uint64_t offset);

}  // namespace cachescape
