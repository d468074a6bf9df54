#pragma once

// Detection-log I/O, validation and singles tabulation.
//
// Text format: UTF-8, header "# eprlog v1 side=<A|B> duration_ps=<u64>"
// followed by one "<time_ps>\t<setting>\t<result>" record per line. The
// duration field may be absent, in which case it defaults to the last
// detection time.
//
// Binary format: magic "EPRL", version 0x01, side byte (0=A, 1=B),
// duration_ps u64 LE, count u64 LE, then 10-byte records
// {time_ps i64 LE, setting u8, result u8} with no padding.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "epr/types.hpp"

namespace epr {

enum class LogFormat { text, binary };

DetectionLog read_log(std::istream& in, LogFormat format);
void write_log(const DetectionLog& log, std::ostream& out, LogFormat format);

// Convenience file wrappers; format inferred from the stream content is
// deliberately not attempted — callers say what they expect.
DetectionLog read_log_file(const std::string& path, LogFormat format);
void write_log_file(const DetectionLog& log, const std::string& path, LogFormat format);

// Sniffs text vs binary from the leading magic bytes ("EPRL" vs "# epr").
DetectionLog read_log_file_auto(const std::string& path);

struct ValidationReport {
  std::uint64_t count = 0;
  std::vector<std::size_t> monotonicity_violations;  // index i with t[i] < t[i-1]
  std::vector<std::size_t> out_of_range;             // bad setting/result/time
  std::vector<std::size_t> beyond_duration;          // t[i] > duration
  std::uint64_t duplicate_timestamps = 0;            // detections sharing the previous time
  double mean_gap_ps = 0.0;                          // mean inter-detection gap
  std::int64_t first_time_ps = 0;
  std::int64_t last_time_ps = 0;

  bool ok() const {
    return monotonicity_violations.empty() && out_of_range.empty() &&
           beyond_duration.empty();
  }
};

// Reporting only: never throws, duplicates are flagged but not errors.
ValidationReport validate_log(const DetectionLog& log);

// 4 counts by (setting, result); sums to the log size.
std::array<std::uint64_t, 4> singles_counts(const DetectionLog& log);

SinglesTable singles_table(const DetectionLog& alice, const DetectionLog& bob);

}  // namespace epr
