#pragma once

#include <cstdint>

namespace landscape_lab {

// Two classes merged into one minimum: p majority-class minima, q minority
// minima, and S class-exclusive features that a pure generation must all draw
// from the same class. Each feature comes from class A with probability
// p / (p + q), independently.
struct MergeScenario {
  std::int64_t p = 1;
  std::int64_t q = 1;
  std::int64_t features = 1;

  void validate() const;
};

// p / q
double initial_odds(const MergeScenario& s);

// Values at or above this are reported as +infinity.
inline constexpr double kOddsSaturation = 1e300;

// (p / q)^S, saturating to +infinity once it would exceed kOddsSaturation.
double smoothed_odds(const MergeScenario& s);

struct MergeProbabilities {
  double pure_a = 0.0;
  double pure_b = 0.0;
  double mixed = 0.0;
};

// (p/n)^S, (q/n)^S and the remainder.
MergeProbabilities merge_probabilities(const MergeScenario& s);

struct MergeCounts {
  std::int64_t pure_a = 0;
  std::int64_t pure_b = 0;
  std::int64_t mixed = 0;

  // pure_a / pure_b, i.e. the odds conditional on a pure outcome.
  // +infinity when pure_b == 0 and pure_a > 0; NaN when both are zero.
  double conditional_odds() const;
};

// Monte Carlo of the feature draws. Trial t uses its own stream derived from
// (seed, t), so the counts do not depend on `workers`.
MergeCounts simulate_merge(const MergeScenario& s, std::int64_t trials, std::uint64_t seed,
                           int workers = 1);

}  // namespace landscape_lab
