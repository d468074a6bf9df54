#include "epr/event_log.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace epr {
namespace {

constexpr char kMagic[4] = {'E', 'P', 'R', 'L'};
constexpr std::uint8_t kVersion = 0x01;

[[noreturn]] void fail_at_line(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_i64(const char* begin, const char* end, std::size_t line,
                       const char* what) {
  std::int64_t value = 0;
  auto r = std::from_chars(begin, end, value);
  if (r.ec != std::errc{} || r.ptr != end) {
    fail_at_line(line, std::string("malformed ") + what);
  }
  return value;
}

void validate_new_detection(DetectionLog& log, Detection d, std::size_t line_or_index,
                            bool text) {
  auto fail = [&](const std::string& what) {
    if (text) fail_at_line(line_or_index, what);
    throw DataError("record " + std::to_string(line_or_index) + ": " + what);
  };
  if (d.setting > 1) fail("setting outside {0,1}");
  if (d.result > 1) fail("result outside {0,1}");
  if (d.time_ps < 0) fail("negative detection time");
  if (!log.detections.empty() && d.time_ps < log.detections.back().time_ps) {
    fail("non-monotone detection time");
  }
  log.detections.push_back(d);
}

DetectionLog read_text(std::istream& in) {
  DetectionLog log;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty stream: missing eprlog header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // Header: "# eprlog v1 side=<A|B> [duration_ps=<u64>]"
  std::istringstream hdr(line);
  std::string hash, name, version, token;
  hdr >> hash >> name >> version;
  if (hash != "#" || name != "eprlog" || version != "v1") {
    throw DataError("line 1: bad header, expected '# eprlog v1 side=<A|B> duration_ps=<u64>'");
  }
  bool have_side = false, have_duration = false;
  log.duration_ps = 0;
  while (hdr >> token) {
    if (token.rfind("side=", 0) == 0 && token.size() == 6) {
      char c = token[5];
      if (c != 'A' && c != 'B') throw DataError("line 1: side must be A or B");
      log.side = (c == 'A') ? Side::alice : Side::bob;
      have_side = true;
    } else if (token.rfind("duration_ps=", 0) == 0) {
      log.duration_ps = parse_i64(token.c_str() + 12, token.c_str() + token.size(), 1,
                                  "duration_ps");
      if (log.duration_ps < 0) throw DataError("line 1: negative duration");
      have_duration = true;
    } else {
      throw DataError("line 1: unknown header field '" + token + "'");
    }
  }
  if (!have_side) throw DataError("line 1: missing side field");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char* p = line.c_str();
    const char* end = p + line.size();
    const char* tab1 = static_cast<const char*>(std::memchr(p, '\t', line.size()));
    if (tab1 == nullptr) fail_at_line(lineno, "malformed record, expected 3 tab-separated fields");
    const char* tab2 = static_cast<const char*>(std::memchr(tab1 + 1, '\t', end - tab1 - 1));
    if (tab2 == nullptr) fail_at_line(lineno, "malformed record, expected 3 tab-separated fields");
    Detection d;
    d.time_ps = parse_i64(p, tab1, lineno, "time");
    std::int64_t s = parse_i64(tab1 + 1, tab2, lineno, "setting");
    std::int64_t r = parse_i64(tab2 + 1, end, lineno, "result");
    if (s < 0 || s > 1) fail_at_line(lineno, "setting outside {0,1}");
    if (r < 0 || r > 1) fail_at_line(lineno, "result outside {0,1}");
    d.setting = static_cast<std::uint8_t>(s);
    d.result = static_cast<std::uint8_t>(r);
    validate_new_detection(log, d, lineno, true);
  }
  if (!have_duration) {
    log.duration_ps = log.detections.empty() ? 0 : log.detections.back().time_ps;
  }
  if (!log.detections.empty() && log.detections.back().time_ps > log.duration_ps) {
    throw DataError("detection time exceeds declared duration");
  }
  return log;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  auto u = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return v;
}

DetectionLog read_binary(std::istream& in) {
  unsigned char header[4 + 1 + 1 + 8 + 8];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (in.gcount() != static_cast<std::streamsize>(sizeof header)) {
    throw DataError("truncated binary stream: incomplete header");
  }
  if (std::memcmp(header, kMagic, 4) != 0) throw DataError("bad magic, not an EPRL file");
  if (header[4] != kVersion) throw DataError("unsupported EPRL version");
  if (header[5] > 1) throw DataError("bad side byte");
  DetectionLog log;
  log.side = header[5] == 0 ? Side::alice : Side::bob;
  std::uint64_t duration = get_u64_le(header + 6);
  std::uint64_t count = get_u64_le(header + 14);
  if (duration > static_cast<std::uint64_t>(INT64_MAX)) {
    throw DataError("duration overflows signed 64-bit ps");
  }
  log.duration_ps = static_cast<std::int64_t>(duration);
  log.detections.reserve(count);
  std::vector<unsigned char> buf(10 * 4096);
  std::uint64_t remaining = count;
  std::size_t index = 0;
  while (remaining > 0) {
    std::size_t batch = std::min<std::uint64_t>(remaining, 4096);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(10 * batch));
    if (in.gcount() != static_cast<std::streamsize>(10 * batch)) {
      throw DataError("truncated binary stream at record " + std::to_string(index));
    }
    for (std::size_t i = 0; i < batch; ++i, ++index) {
      const unsigned char* p = buf.data() + 10 * i;
      Detection d;
      d.time_ps = static_cast<std::int64_t>(get_u64_le(p));
      d.setting = p[8];
      d.result = p[9];
      validate_new_detection(log, d, index, false);
    }
    remaining -= batch;
  }
  if (!log.detections.empty() && log.detections.back().time_ps > log.duration_ps) {
    throw DataError("detection time exceeds declared duration");
  }
  return log;
}

void write_text(const DetectionLog& log, std::ostream& out) {
  out << "# eprlog v1 side=" << side_tag(log.side) << " duration_ps=" << log.duration_ps
      << "\n";
  char buf[64];
  for (const Detection& d : log.detections) {
    int n = std::snprintf(buf, sizeof buf, "%lld\t%d\t%d\n",
                          static_cast<long long>(d.time_ps), int(d.setting), int(d.result));
    out.write(buf, n);
  }
}

void write_binary(const DetectionLog& log, std::ostream& out) {
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  out.put(static_cast<char>(log.side == Side::alice ? 0 : 1));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(log.duration_ps));
  put_le<std::uint64_t>(out, log.detections.size());
  for (const Detection& d : log.detections) {
    put_le<std::int64_t>(out, d.time_ps);
    out.put(static_cast<char>(d.setting));
    out.put(static_cast<char>(d.result));
  }
}

}  // namespace

DetectionLog read_log(std::istream& in, LogFormat format) {
  return format == LogFormat::text ? read_text(in) : read_binary(in);
}

void write_log(const DetectionLog& log, std::ostream& out, LogFormat format) {
  if (format == LogFormat::text) {
    write_text(log, out);
  } else {
    write_binary(log, out);
  }
  if (!out) throw DataError("write failed");
}

DetectionLog read_log_file(const std::string& path, LogFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return read_log(in, format);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_log_file(const DetectionLog& log, const std::string& path, LogFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_log(log, out, format);
}

DetectionLog read_log_file_auto(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open " + path);
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  LogFormat f = std::memcmp(magic, kMagic, 4) == 0 ? LogFormat::binary : LogFormat::text;
  return read_log_file(path, f);
}

ValidationReport validate_log(const DetectionLog& log) {
  ValidationReport rep;
  rep.count = log.detections.size();
  std::int64_t prev = 0;
  for (std::size_t i = 0; i < log.detections.size(); ++i) {
    const Detection& d = log.detections[i];
    if (d.setting > 1 || d.result > 1 || d.time_ps < 0) rep.out_of_range.push_back(i);
    if (d.time_ps > log.duration_ps) rep.beyond_duration.push_back(i);
    if (i > 0) {
      if (d.time_ps < prev) rep.monotonicity_violations.push_back(i);
      if (d.time_ps == prev) ++rep.duplicate_timestamps;
    }
    prev = d.time_ps;
  }
  if (!log.detections.empty()) {
    rep.first_time_ps = log.detections.front().time_ps;
    rep.last_time_ps = log.detections.back().time_ps;
    if (log.detections.size() > 1) {
      rep.mean_gap_ps = static_cast<double>(rep.last_time_ps - rep.first_time_ps) /
                        static_cast<double>(log.detections.size() - 1);
    }
  }
  return rep;
}

std::array<std::uint64_t, 4> singles_counts(const DetectionLog& log) {
  std::array<std::uint64_t, 4> counts{};
  for (const Detection& d : log.detections) {
    counts[SinglesTable::index(d.setting, d.result)] += 1;
  }
  return counts;
}

SinglesTable singles_table(const DetectionLog& alice, const DetectionLog& bob) {
  SinglesTable t;
  t.alice_counts = singles_counts(alice);
  t.bob_counts = singles_counts(bob);
  return t;
}

}  // namespace epr
