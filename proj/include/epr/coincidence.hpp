#pragma once

// Coincidence identification between two detection logs.
//
// Three rules over the shifted difference d = t_B - (t_A + delta):
//   allpr  - every pair with |d| <= w;
//   inseq  - allpr pairs whose detections occur in sequence with no third
//            detection in between (neighbor conditions, strict inequalities);
//   unamb  - allpr pairs where neither endpoint could pair with any other
//            detection (neighbor distances all strictly beyond w).
// Conditions that reference a nonexistent neighbor hold vacuously. Window
// edges are inclusive on both sides.

#include <cstdint>
#include <vector>

#include "epr/types.hpp"

namespace epr {

enum class Rule { allpr, inseq, unamb };

const char* rule_name(Rule r);
Rule rule_from_name(const std::string& name);

struct IndexPair {
  std::uint64_t k = 0;  // index into the Alice log
  std::uint64_t l = 0;  // index into the Bob log
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

struct CoincidenceSet {
  Rule rule = Rule::allpr;
  WindowSpec window;
  std::vector<IndexPair> pairs;  // sorted lexicographically by (k, l)

  std::size_t size() const { return pairs.size(); }
};

// Two-pointer sweep over the sorted logs, O(N_A + N_B + |output|).
CoincidenceSet find_coincidences(const DetectionLog& log_a, const DetectionLog& log_b,
                                 const WindowSpec& window, Rule rule);

// Count without materializing pairs. For allpr this is O(N_A + N_B) even
// when the output would be enormous (the all-pairs blowup at w ~ T).
std::uint64_t count_coincidences(const DetectionLog& log_a, const DetectionLog& log_b,
                                 const WindowSpec& window, Rule rule);

// Literal evaluation of the set-builder definitions over all N_A * N_B
// pairs. Test oracle; guarded against accidental huge inputs.
CoincidenceSet brute_force_coincidences(const DetectionLog& log_a,
                                        const DetectionLog& log_b,
                                        const WindowSpec& window, Rule rule,
                                        std::uint64_t pair_guard = 100'000'000);

CellTable tabulate_cells(const CoincidenceSet& cs, const DetectionLog& log_a,
                         const DetectionLog& log_b);

struct WidthCount {
  std::int64_t half_width_ps = 0;
  std::uint64_t count = 0;
};

// Counts per half-width for a fixed delta, one candidate-pair enumeration
// for all widths (the inseq side conditions are width-independent, and an
// allpr pair is unambiguous exactly while w stays below its nearest
// neighbor distance, so each pair contributes an interval of widths).
std::vector<WidthCount> sweep_widths(const DetectionLog& log_a, const DetectionLog& log_b,
                                     std::int64_t delta_ps,
                                     const std::vector<std::int64_t>& half_widths_ps,
                                     Rule rule, std::uint64_t pair_guard = 200'000'000);

}  // namespace epr
