#pragma once

// Core data model for two-station detection-log analysis.
//
// All times are integer picoseconds. The analysis grid (0.5 ns strips,
// ns-valued windows) is exactly representable, and a 10-second run is
// 10^13 ps, far inside int64 range.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace epr {

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

enum class Side : std::uint8_t { alice = 0, bob = 1 };

inline char side_tag(Side s) { return s == Side::alice ? 'A' : 'B'; }

struct Detection {
  std::int64_t time_ps = 0;
  std::uint8_t setting = 0;  // 0 or 1
  std::uint8_t result = 0;   // 0 or 1

  friend bool operator==(const Detection&, const Detection&) = default;
};

// One station's time-ordered log. `duration_ps` is the experiment span;
// detections must be sorted (ties keep input order) and lie in [0, duration].
struct DetectionLog {
  Side side = Side::alice;
  std::int64_t duration_ps = 0;
  std::vector<Detection> detections;

  std::size_t size() const { return detections.size(); }
  bool empty() const { return detections.empty(); }
  std::int64_t time(std::size_t i) const { return detections[i].time_ps; }

  friend bool operator==(const DetectionLog&, const DetectionLog&) = default;
};

// Per-station detection counts by (setting, result), irrespective of pairing.
struct SinglesTable {
  std::array<std::uint64_t, 4> alice_counts{};  // index setting*2 + result
  std::array<std::uint64_t, 4> bob_counts{};

  static std::size_t index(int setting, int result) {
    return static_cast<std::size_t>(setting * 2 + result);
  }
  std::uint64_t alice(int s, int r) const { return alice_counts[index(s, r)]; }
  std::uint64_t bob(int s, int r) const { return bob_counts[index(s, r)]; }
  std::uint64_t alice_total() const;
  std::uint64_t bob_total() const;
};

// Detection window on the time difference t_B - t_A, stored as the shift
// delta = (v+u)/2 and half-width w = (v-u)/2. Construction from edges
// demands that u and v share parity so both are exact in integer ps.
class WindowSpec {
public:
  WindowSpec() = default;
  static WindowSpec from_center(std::int64_t delta_ps, std::int64_t half_width_ps);
  static WindowSpec from_edges(std::int64_t u_ps, std::int64_t v_ps);

  std::int64_t delta_ps() const { return delta_ps_; }
  std::int64_t half_width_ps() const { return half_width_ps_; }
  std::int64_t u_ps() const { return delta_ps_ - half_width_ps_; }
  std::int64_t v_ps() const { return delta_ps_ + half_width_ps_; }
  std::int64_t width_ps() const { return 2 * half_width_ps_; }

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

private:
  std::int64_t delta_ps_ = 0;
  std::int64_t half_width_ps_ = 0;
};

// Coincidence counts over the sixteen (s_A, s_B, r_A, r_B) combinations.
struct CellTable {
  std::array<std::uint64_t, 16> counts{};

  static std::size_t index(int s_a, int s_b, int r_a, int r_b) {
    return static_cast<std::size_t>(((s_a * 2 + s_b) * 2 + r_a) * 2 + r_b);
  }
  std::uint64_t& at(int s_a, int s_b, int r_a, int r_b) {
    return counts[index(s_a, s_b, r_a, r_b)];
  }
  std::uint64_t at(int s_a, int s_b, int r_a, int r_b) const {
    return counts[index(s_a, s_b, r_a, r_b)];
  }
  std::uint64_t total() const;

  friend bool operator==(const CellTable&, const CellTable&) = default;
};

// Real-valued 16-cell table (expected false positives, W_T, ...). Same
// index layout as CellTable.
using Cell16 = std::array<double, 16>;

// Exact conversion between ns-valued decimal strings and integer ps.
// "3.8" -> 3800; more than three fractional digits must be zero.
std::int64_t parse_ns_to_ps(const std::string& text);
std::string format_ps_as_ns(std::int64_t ps);

inline double ps_to_ns(std::int64_t ps) { return static_cast<double>(ps) * 1e-3; }

}  // namespace epr
