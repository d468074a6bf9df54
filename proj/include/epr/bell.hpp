#pragma once

// CHSH and no-signaling statistics computed from a 16-cell coincidence
// table. Standard errors follow the binomial form SE(p) = sqrt(p(1-p)/N);
// a correlation E = 2p - 1 carries twice that, and combined quantities use
// the root sum of squares of their terms.

#include <array>

#include "epr/types.hpp"

namespace epr {

struct Correlation {
  double value = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};

// E(s_A, s_B): frequency results agree minus frequency they disagree.
Correlation correlation(const CellTable& cells, int s_a, int s_b);

struct ChshReport {
  std::array<Correlation, 4> e;  // index s_a*2 + s_b
  double value_2a = 0.0;         // |E00 - E10| + |E01 + E11|
  double value_2b = 0.0;         // |E01 - E11| + |E00 + E10|
  double se = 0.0;               // shared by both permutations
  double z_2a = 0.0;             // (value - 2)/SE
  double z_2b = 0.0;
  bool violated_2a = false;      // value > 2
  bool violated_2b = false;

  const Correlation& at(int s_a, int s_b) const { return e[s_a * 2 + s_b]; }
};

ChshReport chsh(const CellTable& cells);

struct MarginalProbability {
  double p = 0.0;  // P(r = 0 | s_local, s_remote)
  double se = 0.0;
  std::uint64_t n = 0;
};

struct NoSignalDelta {
  Side side = Side::alice;
  int local_setting = 0;
  MarginalProbability p_remote0;  // remote setting 0
  MarginalProbability p_remote1;  // remote setting 1
  double delta = 0.0;             // p_remote0 - p_remote1
  double se = 0.0;
  double z = 0.0;
};

struct NoSignalReport {
  std::array<NoSignalDelta, 4> deltas;  // A/s=0, A/s=1, B/s=0, B/s=1
  double max_abs_z = 0.0;
};

NoSignalReport no_signaling(const CellTable& cells);

}  // namespace epr
