#include "epr/fair_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epr {
namespace {

constexpr double kPi = 3.14159265358979323846;

// A Moebius expression (a + b*t) / (c + d*t).
struct Moebius {
  double a, b, c, d;
  double eval(double t) const { return (a + b * t) / (c + d * t); }
};

struct PairSystem {
  // Equation i: M[i](t) = N[i](u), t and u the reciprocal ratios.
  std::array<Moebius, 2> m;
  std::array<Moebius, 2> n;
};

// Cross-multiplied residual of equation i at (t, u), normalized by the
// magnitude of its two products.
double cross_residual(const PairSystem& sys, int i, double t, double u) {
  const Moebius& M = sys.m[i];
  const Moebius& N = sys.n[i];
  const double lhs = (M.a + M.b * t) * (N.c + N.d * u);
  const double rhs = (N.a + N.b * u) * (M.c + M.d * t);
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return (lhs - rhs) / scale;
}

void newton_polish(const PairSystem& sys, double& t, double& u) {
  for (int iter = 0; iter < 60; ++iter) {
    double e1 = cross_residual(sys, 0, t, u);
    double e2 = cross_residual(sys, 1, t, u);
    const double norm0 = std::abs(e1) + std::abs(e2);
    if (norm0 < 1e-15) return;
    // Numerical Jacobian on the normalized residuals; the system is tiny
    // and extremely well scaled after normalization.
    const double ht = std::max(1e-9, 1e-7 * std::abs(t));
    const double hu = std::max(1e-9, 1e-7 * std::abs(u));
    const double j11 = (cross_residual(sys, 0, t + ht, u) - e1) / ht;
    const double j12 = (cross_residual(sys, 0, t, u + hu) - e1) / hu;
    const double j21 = (cross_residual(sys, 1, t + ht, u) - e2) / ht;
    const double j22 = (cross_residual(sys, 1, t, u + hu) - e2) / hu;
    const double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return;
    double dt = (-e1 * j22 + e2 * j12) / det;
    double du = (-e2 * j11 + e1 * j21) / det;
    double step = 1.0;
    bool accepted = false;
    for (int damp = 0; damp < 20; ++damp, step *= 0.5) {
      const double tn = t + step * dt;
      const double un = u + step * du;
      if (tn <= 0.0 || un <= 0.0) continue;
      const double norm1 =
          std::abs(cross_residual(sys, 0, tn, un)) + std::abs(cross_residual(sys, 1, tn, un));
      if (norm1 < norm0) {
        t = tn;
        u = un;
        accepted = true;
        break;
      }
    }
    if (!accepted) return;
  }
}

// Enumerates the positive solutions of {M1(t)=N1(u), M2(t)=N2(u)}.
// Substituting u(t) = N1^{-1}(M1(t)) (a Moebius map of t) into the second
// equation and cross-multiplying yields a quadratic in t.
std::vector<RatioPair> solve_pair_system(const PairSystem& sys) {
  const auto [a1, b1, c1, d1] = sys.m[0];
  const auto [e1, f1, g1, h1] = sys.n[0];
  const auto [a2, b2, c2, d2] = sys.m[1];
  const auto [e2, f2, g2, h2] = sys.n[1];

  // u(t) = (P0 + P1 t) / (Q0 + Q1 t)
  const double p0 = e1 * c1 - g1 * a1;
  const double p1 = e1 * d1 - g1 * b1;
  const double q0 = h1 * a1 - f1 * c1;
  const double q1 = h1 * b1 - f1 * d1;
  // N2(u(t)) = (R0 + R1 t) / (S0 + S1 t)
  const double r0 = e2 * q0 + f2 * p0;
  const double r1 = e2 * q1 + f2 * p1;
  const double s0 = g2 * q0 + h2 * p0;
  const double s1 = g2 * q1 + h2 * p1;
  // (a2 + b2 t)(S0 + S1 t) = (R0 + R1 t)(c2 + d2 t)
  const double qa = b2 * s1 - r1 * d2;
  const double qb = a2 * s1 + b2 * s0 - r0 * d2 - r1 * c2;
  const double qc = a2 * s0 - r0 * c2;

  const double scale = std::max({std::abs(qa), std::abs(qb), std::abs(qc)});
  std::vector<double> t_roots;
  if (scale <= 0.0) {
    throw SolverError("efficiency-ratio system is identically degenerate");
  }
  const double na = qa / scale, nb = qb / scale, nc = qc / scale;
  constexpr double kDegenerate = 1e-14;
  if (std::abs(na) > kDegenerate) {
    const double disc = nb * nb - 4.0 * na * nc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // Numerically stable pairing of the two roots.
      const double q = -0.5 * (nb + std::copysign(sq, nb));
      if (q != 0.0) {
        t_roots.push_back(q / na);
        t_roots.push_back(nc / q);
      } else {
        t_roots.push_back(0.0);
      }
    }
  } else if (std::abs(nb) > kDegenerate) {
    t_roots.push_back(-nc / nb);
  } else {
    throw SolverError("efficiency-ratio system is rank deficient (non-unique family)");
  }

  std::vector<RatioPair> out;
  for (double t : t_roots) {
    if (!std::isfinite(t) || t <= 0.0) continue;
    const double den = q0 + q1 * t;
    if (den == 0.0) continue;
    double u = (p0 + p1 * t) / den;
    if (!std::isfinite(u) || u <= 0.0) continue;
    newton_polish(sys, t, u);
    RatioPair pair{1.0 / t, 1.0 / u};
    bool duplicate = false;
    for (const RatioPair& seen : out) {
      if (std::abs(seen.r0 - pair.r0) < 1e-9 * std::max(1.0, std::abs(seen.r0)) &&
          std::abs(seen.r1 - pair.r1) < 1e-9 * std::max(1.0, std::abs(seen.r1))) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(pair);
  }
  return out;
}

double w(const Cell16& t, int s_a, int s_b, int r_a, int r_b) {
  return t[CellTable::index(s_a, s_b, r_a, r_b)];
}

// Conditions (5a-d) evaluated on a C table; returns {lhs, rhs}.
std::pair<double, double> condition_sides(const Cell16& c, int which) {
  auto v = [&](int s_a, int s_b, int r_a, int r_b) { return w(c, s_a, s_b, r_a, r_b); };
  switch (which) {
    case 0:  // 5a: Alice marginal ratio at s_A=0 across s_B
      return {(v(0, 0, 0, 0) + v(0, 0, 0, 1)) / (v(0, 0, 1, 0) + v(0, 0, 1, 1)),
              (v(0, 1, 0, 0) + v(0, 1, 0, 1)) / (v(0, 1, 1, 0) + v(0, 1, 1, 1))};
    case 1:  // 5b: s_A=1
      return {(v(1, 0, 0, 0) + v(1, 0, 0, 1)) / (v(1, 0, 1, 0) + v(1, 0, 1, 1)),
              (v(1, 1, 0, 0) + v(1, 1, 0, 1)) / (v(1, 1, 1, 0) + v(1, 1, 1, 1))};
    case 2:  // 5c: Bob marginal ratio at s_B=0 across s_A
      return {(v(0, 0, 0, 0) + v(0, 0, 1, 0)) / (v(0, 0, 0, 1) + v(0, 0, 1, 1)),
              (v(1, 0, 0, 0) + v(1, 0, 1, 0)) / (v(1, 0, 0, 1) + v(1, 0, 1, 1))};
    default:  // 5d: s_B=1
      return {(v(0, 1, 0, 0) + v(0, 1, 1, 0)) / (v(0, 1, 0, 1) + v(0, 1, 1, 1)),
              (v(1, 1, 0, 0) + v(1, 1, 1, 0)) / (v(1, 1, 0, 1) + v(1, 1, 1, 1))};
  }
}

Cell16 apply_ratios(const Cell16& w_true, const EfficiencyRatios& r) {
  // Gauge lambda(s,0) = 1; only the ratios matter after normalization.
  const std::array<double, 4> lam_a{1.0, r.a0, 1.0, r.a1};  // (s,r) -> s*2+r
  const std::array<double, 4> lam_b{1.0, r.b0, 1.0, r.b1};
  Cell16 c{};
  for (int s_a = 0; s_a < 2; ++s_a)
    for (int s_b = 0; s_b < 2; ++s_b)
      for (int r_a = 0; r_a < 2; ++r_a)
        for (int r_b = 0; r_b < 2; ++r_b) {
          const auto i = CellTable::index(s_a, s_b, r_a, r_b);
          c[i] = w_true[i] / (lam_a[s_a * 2 + r_a] * lam_b[s_b * 2 + r_b]);
        }
  return c;
}

}  // namespace

Cell16 per_cell_false_positives(const SinglesTable& singles, std::int64_t window_width_ps,
                                std::int64_t span_ps) {
  if (span_ps <= 0) throw DataError("experiment span must be positive");
  const double frac = ps_to_ns(window_width_ps) / ps_to_ns(span_ps);
  Cell16 out{};
  for (int s_a = 0; s_a < 2; ++s_a)
    for (int s_b = 0; s_b < 2; ++s_b)
      for (int r_a = 0; r_a < 2; ++r_a)
        for (int r_b = 0; r_b < 2; ++r_b) {
          out[CellTable::index(s_a, s_b, r_a, r_b)] =
              static_cast<double>(singles.alice(s_a, r_a)) *
              static_cast<double>(singles.bob(s_b, r_b)) * frac;
        }
  return out;
}

TrueFalseDecomposition decompose(const CellTable& w_tot, const Cell16& w_false) {
  TrueFalseDecomposition d;
  d.w_false = w_false;
  for (std::size_t i = 0; i < 16; ++i) {
    d.w_tot[i] = static_cast<double>(w_tot.counts[i]);
    const double t = d.w_tot[i] - w_false[i];
    if (t < 0.0) {
      d.clamped_cells.push_back(i);
      d.w_true[i] = 0.0;
    } else {
      d.w_true[i] = t;
    }
  }
  return d;
}

EfficiencyRatios solve_efficiency_ratios(const Cell16& w_true) {
  for (std::size_t i = 0; i < 16; ++i) {
    if (!(w_true[i] > 0.0)) {
      throw SolverError("W_T must be strictly positive in every cell (cell index " +
                        std::to_string(i) + ")");
    }
  }

  // Bob's system from (5a),(5b): reciprocals t = 1/b0 pair with the s_B=0
  // block, u = 1/b1 with the s_B=1 block.
  PairSystem bob;
  for (int s_a = 0; s_a < 2; ++s_a) {
    bob.m[s_a] = {w(w_true, s_a, 0, 0, 0), w(w_true, s_a, 0, 0, 1), w(w_true, s_a, 0, 1, 0),
                  w(w_true, s_a, 0, 1, 1)};
    bob.n[s_a] = {w(w_true, s_a, 1, 0, 0), w(w_true, s_a, 1, 0, 1), w(w_true, s_a, 1, 1, 0),
                  w(w_true, s_a, 1, 1, 1)};
  }
  // Alice's system from (5c),(5d): t = 1/a0, u = 1/a1.
  PairSystem alice;
  for (int s_b = 0; s_b < 2; ++s_b) {
    alice.m[s_b] = {w(w_true, 0, s_b, 0, 0), w(w_true, 0, s_b, 1, 0), w(w_true, 0, s_b, 0, 1),
                    w(w_true, 0, s_b, 1, 1)};
    alice.n[s_b] = {w(w_true, 1, s_b, 0, 0), w(w_true, 1, s_b, 1, 0), w(w_true, 1, s_b, 0, 1),
                    w(w_true, 1, s_b, 1, 1)};
  }

  EfficiencyRatios out;
  out.bob_roots = solve_pair_system(bob);
  out.alice_roots = solve_pair_system(alice);
  if (out.bob_roots.empty() || out.alice_roots.empty()) {
    throw SolverError("no positive efficiency ratios satisfy the no-signaling conditions");
  }
  out.unique = out.bob_roots.size() == 1 && out.alice_roots.size() == 1;

  // With several roots, prefer the pair closest to unit ratios.
  auto pick = [](const std::vector<RatioPair>& roots) {
    const RatioPair* best = &roots.front();
    double best_dist = std::numeric_limits<double>::infinity();
    for (const RatioPair& r : roots) {
      const double dist = std::abs(std::log(r.r0)) + std::abs(std::log(r.r1));
      if (dist < best_dist) {
        best_dist = dist;
        best = &r;
      }
    }
    return *best;
  };
  const RatioPair a = pick(out.alice_roots);
  const RatioPair b = pick(out.bob_roots);
  out.a0 = a.r0;
  out.a1 = a.r1;
  out.b0 = b.r0;
  out.b1 = b.r1;

  const Cell16 c = apply_ratios(w_true, out);
  for (int i = 0; i < 4; ++i) {
    const auto [lhs, rhs] = condition_sides(c, i);
    out.residuals[i] = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
  }
  return out;
}

ProbabilityTable normalized_probabilities(const Cell16& w_true,
                                          const EfficiencyRatios& ratios) {
  const Cell16 c = apply_ratios(w_true, ratios);
  ProbabilityTable table;
  for (int s_a = 0; s_a < 2; ++s_a)
    for (int s_b = 0; s_b < 2; ++s_b) {
      double block = 0.0;
      for (int r_a = 0; r_a < 2; ++r_a)
        for (int r_b = 0; r_b < 2; ++r_b) block += c[CellTable::index(s_a, s_b, r_a, r_b)];
      if (!(block > 0.0)) {
        throw SolverError("zero block sum while normalizing probabilities");
      }
      for (int r_a = 0; r_a < 2; ++r_a)
        for (int r_b = 0; r_b < 2; ++r_b) {
          const auto i = CellTable::index(s_a, s_b, r_a, r_b);
          table.p[i] = c[i] / block;
        }
    }
  return table;
}

std::array<double, 4> correlations_from_probabilities(const ProbabilityTable& t) {
  std::array<double, 4> e{};
  for (int s_a = 0; s_a < 2; ++s_a)
    for (int s_b = 0; s_b < 2; ++s_b) {
      e[s_a * 2 + s_b] = t.at(s_a, s_b, 0, 0) + t.at(s_a, s_b, 1, 1) -
                         t.at(s_a, s_b, 0, 1) - t.at(s_a, s_b, 1, 0);
    }
  return e;
}

MasanesResult masanes_check(const std::array<double, 4>& correlations) {
  std::array<double, 4> s;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(correlations[i]) > 1.0 + 1e-12) {
      throw DataError("correlation outside [-1, 1]");
    }
    s[i] = std::asin(std::clamp(correlations[i], -1.0, 1.0));
  }
  MasanesResult res;
  for (int minus = 0; minus < 4; ++minus) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) sum += (i == minus ? -s[i] : s[i]);
    res.worst_abs_sum = std::max(res.worst_abs_sum, std::abs(sum));
  }
  res.margin = kPi - res.worst_abs_sum;
  res.pass = res.margin >= -1e-12;
  return res;
}

std::array<AkDiscrepancy, 4> ak_fair_sampling_check(const SinglesTable& singles,
                                                    const EfficiencyRatios& ratios) {
  std::array<AkDiscrepancy, 4> out;
  const std::array<double, 4> lambda{ratios.a0, ratios.a1, ratios.b0, ratios.b1};
  std::size_t i = 0;
  for (Side side : {Side::alice, Side::bob}) {
    for (int s = 0; s < 2; ++s, ++i) {
      const std::uint64_t d1 = side == Side::alice ? singles.alice(s, 1) : singles.bob(s, 1);
      const std::uint64_t d0 = side == Side::alice ? singles.alice(s, 0) : singles.bob(s, 0);
      if (d0 == 0) throw DataError("zero singles count for result 0");
      AkDiscrepancy d;
      d.side = side;
      d.setting = s;
      d.singles_ratio = static_cast<double>(d1) / static_cast<double>(d0);
      d.lambda_ratio = lambda[i];
      d.relative_gap = std::abs(d.singles_ratio - d.lambda_ratio) / d.lambda_ratio;
      out[i] = d;
    }
  }
  return out;
}

}  // namespace epr
