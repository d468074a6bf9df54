#include "epr/bell.hpp"

#include <cmath>

namespace epr {
namespace {

std::uint64_t block_total(const CellTable& cells, int s_a, int s_b) {
  std::uint64_t n = 0;
  for (int r_a = 0; r_a < 2; ++r_a)
    for (int r_b = 0; r_b < 2; ++r_b) n += cells.at(s_a, s_b, r_a, r_b);
  return n;
}

MarginalProbability marginal(const CellTable& cells, Side side, int s_local, int s_remote) {
  const int s_a = side == Side::alice ? s_local : s_remote;
  const int s_b = side == Side::alice ? s_remote : s_local;
  const std::uint64_t n = block_total(cells, s_a, s_b);
  if (n == 0) {
    throw DataError("no coincidences for setting pair (" + std::to_string(s_a) + "," +
                    std::to_string(s_b) + ")");
  }
  std::uint64_t zeros = 0;
  for (int r_other = 0; r_other < 2; ++r_other) {
    zeros += side == Side::alice ? cells.at(s_a, s_b, 0, r_other)
                                 : cells.at(s_a, s_b, r_other, 0);
  }
  MarginalProbability m;
  m.n = n;
  m.p = static_cast<double>(zeros) / static_cast<double>(n);
  m.se = std::sqrt(m.p * (1.0 - m.p) / static_cast<double>(n));
  return m;
}

}  // namespace

Correlation correlation(const CellTable& cells, int s_a, int s_b) {
  const std::uint64_t n = block_total(cells, s_a, s_b);
  if (n == 0) {
    throw DataError("correlation undefined: no coincidences for setting pair (" +
                    std::to_string(s_a) + "," + std::to_string(s_b) + ")");
  }
  const std::uint64_t agree = cells.at(s_a, s_b, 0, 0) + cells.at(s_a, s_b, 1, 1);
  Correlation c;
  c.n = n;
  const double p = static_cast<double>(agree) / static_cast<double>(n);
  c.value = 2.0 * p - 1.0;
  c.se = 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return c;
}

ChshReport chsh(const CellTable& cells) {
  ChshReport rep;
  for (int s_a = 0; s_a < 2; ++s_a)
    for (int s_b = 0; s_b < 2; ++s_b) rep.e[s_a * 2 + s_b] = correlation(cells, s_a, s_b);

  const double e00 = rep.at(0, 0).value;
  const double e01 = rep.at(0, 1).value;
  const double e10 = rep.at(1, 0).value;
  const double e11 = rep.at(1, 1).value;
  rep.value_2a = std::abs(e00 - e10) + std::abs(e01 + e11);
  rep.value_2b = std::abs(e01 - e11) + std::abs(e00 + e10);
  double var = 0.0;
  for (const auto& c : rep.e) var += c.se * c.se;
  rep.se = std::sqrt(var);
  if (rep.se > 0.0) {
    rep.z_2a = (rep.value_2a - 2.0) / rep.se;
    rep.z_2b = (rep.value_2b - 2.0) / rep.se;
  }
  rep.violated_2a = rep.value_2a > 2.0;
  rep.violated_2b = rep.value_2b > 2.0;
  return rep;
}

NoSignalReport no_signaling(const CellTable& cells) {
  NoSignalReport rep;
  std::size_t i = 0;
  for (Side side : {Side::alice, Side::bob}) {
    for (int s_local = 0; s_local < 2; ++s_local, ++i) {
      NoSignalDelta d;
      d.side = side;
      d.local_setting = s_local;
      d.p_remote0 = marginal(cells, side, s_local, 0);
      d.p_remote1 = marginal(cells, side, s_local, 1);
      d.delta = d.p_remote0.p - d.p_remote1.p;
      d.se = std::sqrt(d.p_remote0.se * d.p_remote0.se + d.p_remote1.se * d.p_remote1.se);
      d.z = d.se > 0.0 ? d.delta / d.se : 0.0;
      rep.deltas[i] = d;
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(d.z));
    }
  }
  return rep;
}

}  // namespace epr
