#include "cachescape/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "cachescape/error.hpp"

namespace cachescape {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(' ', start);
    fields.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

bool is_lower_hex(char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); }

std::uint64_t parse_hex(std::string_view field, std::size_t line, const char* what) {
  if (field.size() < 3 || field.substr(0, 2) != "0x") {
    throw ParseError(line, std::string(what) + " must be 0x-prefixed hex, got '" +
                               std::string(field) + "'");
  }
  const std::string_view digits = field.substr(2);
  for (char c : digits) {
    if (!is_lower_hex(c)) {
      throw ParseError(line, std::string(what) + " must be lowercase hex, got '" +
                                 std::string(field) + "'");
    }
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, 16);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw ParseError(line, std::string(what) + " out of range: '" + std::string(field) + "'");
  }
  return value;
}

unsigned parse_small(std::string_view field, std::size_t line, const char* what, unsigned max) {
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || value > max) {
    throw ParseError(line, std::string(what) + " must be an integer in [0, " +
                               std::to_string(max) + "], got '" + std::string(field) + "'");
  }
  return value;
}

TraceRecord parse_record(std::string_view text, std::size_t line) {
  const auto fields = split_spaces(text);
  if (fields.size() != 5 && fields.size() != 6) {
    throw ParseError(line, "expected 5 or 6 space-separated fields, got " +
                               std::to_string(fields.size()));
  }
  TraceRecord rec;
  if (fields[0].size() < 2 || fields[0][0] != 'T') {
    throw ParseError(line, "thread field must look like T<id>, got '" + std::string(fields[0]) + "'");
  }
  rec.thread_id = static_cast<std::uint16_t>(
      parse_small(fields[0].substr(1), line, "thread id", 0xffff));
  rec.pc = parse_hex(fields[1], line, "pc");

  std::size_t next = 3;
  if (fields[2] == "L" || fields[2] == "S") {
    if (fields.size() != 6) throw ParseError(line, "memory op needs an address");
    rec.mem = MemOp{fields[2] == "L" ? MemKind::Load : MemKind::Store,
                    parse_hex(fields[3], line, "address")};
    next = 4;
  } else if (fields[2] == "-") {
    if (fields.size() != 5) throw ParseError(line, "'-' record must not carry an address");
  } else {
    throw ParseError(line, "memory op must be L, S or -, got '" + std::string(fields[2]) + "'");
  }
  rec.num_src_regs = static_cast<std::uint8_t>(parse_small(fields[next], line, "nsrc", kMaxSrcRegs));
  rec.num_dst_regs =
      static_cast<std::uint8_t>(parse_small(fields[next + 1], line, "ndst", kMaxDstRegs));
  return rec;
}

void put_hex(std::string& out, std::uint64_t value) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, 16);
  out += "0x";
  out.append(buf, res.ptr);
}

}  // namespace

Trace read_trace(std::istream& in, std::string name) {
  Trace trace;
  trace.name = std::move(name);
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') throw ParseError(lineno, "CR line ending");
    if (!saw_header) {
      if (line != kTraceHeader) {
        throw ParseError(lineno, "missing header '" + std::string(kTraceHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    trace.records.push_back(parse_record(line, lineno));
  }
  if (in.bad()) throw IoError("failed reading trace '" + trace.name + "'");
  if (!saw_header) throw ParseError(1, "missing header '" + std::string(kTraceHeader) + "'");
  return trace;
}

Trace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path.string() + "'");
  try {
    return read_trace(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path.string());
  }
}

void write_trace(const Trace& trace, std::ostream& out) {
  std::string buf;
  buf.reserve(64);
  out << kTraceHeader << '\n';
  for (const auto& rec : trace.records) {
    buf.clear();
    buf += 'T';
    buf += std::to_string(rec.thread_id);
    buf += ' ';
    put_hex(buf, rec.pc);
    if (rec.mem) {
      buf += rec.mem->kind == MemKind::Load ? " L " : " S ";
      put_hex(buf, rec.mem->address);
    } else {
      buf += " -";
    }
    buf += ' ';
    buf += std::to_string(rec.num_src_regs);
    buf += ' ';
    buf += std::to_string(rec.num_dst_regs);
    buf += '\n';
    out << buf;
  }
  if (!out) throw IoError("failed writing trace '" + trace.name + "'");
}

void write_trace_file(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  write_trace(trace, out);
}

bool is_single_thread(const Trace& trace) {
  for (const auto& rec : trace.records) {
    if (rec.thread_id != trace.records.front().thread_id) return false;
  }
  return true;
}

Trace relocate(const Trace& trace, std::uint16_t thread_id, std::uint64_t offset) {
  Trace out{trace.name, trace.records};
  for (auto& rec : out.records) {
    rec.thread_id = thread_id;
    rec.pc += offset;
    if (rec.mem) rec.mem->address += offset;
  }
  return out;
}

}  // namespace cachescape
