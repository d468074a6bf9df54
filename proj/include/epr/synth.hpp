#pragma once

// Synthetic experiment generator with planted ground truth.
//
// Pair emissions form a homogeneous Poisson process. Per pair: settings are
// read from each side's switching slot at emission time (slots are i.i.d.
// uniform bits, a pure function of seed and slot index), outcomes come from
// the configured model, each side keeps its detection with probability
// lambda(s, r), and the detection time adds a delay drawn from the planted
// per-(s, r) distribution (point mass at the bin's right edge unless
// jitter_within_bin). Background singles are independent Poisson processes
// with uniform random setting and result. Detections inside the first
// `suppression` of each switching period are discarded, as are detections
// past the duration. Identical config and seed give byte-identical logs.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epr/coincidence.hpp"
#include "epr/delay.hpp"
#include "epr/types.hpp"

namespace epr {

// Singlet statistics: P(r_A, r_B | s_A, s_B) with correlation
// E = -cos 2(alpha_A - alpha_B), uniform marginals.
struct QuantumOutcomes {
  std::array<double, 2> alice_angles_rad{0.0, 0.0};
  std::array<double, 2> bob_angles_rad{0.0, 0.0};
};

// Deterministic local responses to a shared uniform phase; gives the
// classical triangle correlation (never violates CHSH).
struct LhvOutcomes {
  std::array<double, 2> alice_angles_rad{0.0, 0.0};
  std::array<double, 2> bob_angles_rad{0.0, 0.0};
};

// Arbitrary 16-cell probabilities, each (s_A, s_B) block summing to 1.
struct TableOutcomes {
  Cell16 p{};
};

using OutcomeModel = std::variant<QuantumOutcomes, LhvOutcomes, TableOutcomes>;

// CHSH-optimal singlet angles (expression 2a approaches 2*sqrt(2)).
QuantumOutcomes optimal_singlet_angles();

struct SyntheticConfig {
  std::int64_t duration_ps = 10'000'000'000'000;  // 10 s
  double pair_rate_hz = 0.0;
  OutcomeModel outcomes = QuantumOutcomes{};
  DelayModel delays;                       // planted per-(s,r) delay distributions
  std::array<double, 4> lambda_alice{1.0, 1.0, 1.0, 1.0};  // (s,r) -> s*2+r, in (0,1]
  std::array<double, 4> lambda_bob{1.0, 1.0, 1.0, 1.0};
  double background_rate_alice_hz = 0.0;
  double background_rate_bob_hz = 0.0;
  std::int64_t switching_period_ps = 100'000;
  std::int64_t suppression_ps = 14'000;
  bool jitter_within_bin = false;
  std::uint64_t seed = 0;

  void validate() const;
};

// One planted pair and where its detections ended up (-1 when lost to
// thinning, suppression, or the duration cut).
struct TruePair {
  std::uint64_t pair_id = 0;
  std::int64_t emit_ps = 0;
  std::int64_t alice_index = -1;
  std::int64_t bob_index = -1;
};

struct GroundTruth {
  std::vector<TruePair> pairs;

  std::uint64_t detected_pairs() const;  // both endpoints present
};

struct SyntheticExperiment {
  DetectionLog alice;
  DetectionLog bob;
  GroundTruth truth;
};

SyntheticExperiment generate(const SyntheticConfig& config);

// Analytic expectation of the per-(setting, result) singles counts, for
// oracle tests against generated logs.
std::array<double, 4> expected_singles_mean(const SyntheticConfig& config, Side side);

// P(r_A, r_B | s_A, s_B) of the configured outcome model, as a Cell16.
Cell16 outcome_probabilities(const OutcomeModel& model);

// Precision/recall of an identified coincidence set against ground truth.
struct PairingQuality {
  std::uint64_t identified = 0;
  std::uint64_t true_positive = 0;
  std::uint64_t detected_true_pairs = 0;
  double precision = 0.0;
  double recall = 0.0;
};

PairingQuality score_pairs(const std::vector<IndexPair>& pairs, const GroundTruth& truth);

// JSON round-trip for config files (CLI surface).
SyntheticConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SyntheticConfig& config);

}  // namespace epr
