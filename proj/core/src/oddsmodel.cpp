#include "landscape_lab/oddsmodel.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/parallel.hpp"
#include "landscape_lab/random.hpp"

namespace landscape_lab {

void MergeScenario::validate() const {
  if (p < 1 || q < 1 || features < 1) throw InputError("merge scenario needs p, q, S >= 1");
}

double initial_odds(const MergeScenario& s) {
  s.validate();
  return static_cast<double>(s.p) / static_cast<double>(s.q);
}

double smoothed_odds(const MergeScenario& s) {
  s.validate();
  const double log_odds = static_cast<double>(s.features) *
                          (std::log(static_cast<double>(s.p)) - std::log(static_cast<double>(s.q)));
  if (log_odds >= std::log(kOddsSaturation)) return std::numeric_limits<double>::infinity();
  const double v = std::pow(initial_odds(s), static_cast<double>(s.features));
  return v >= kOddsSaturation ? std::numeric_limits<double>::infinity() : v;
}

MergeProbabilities merge_probabilities(const MergeScenario& s) {
  s.validate();
  const double n = static_cast<double>(s.p + s.q);
  const double sf = static_cast<double>(s.features);
  MergeProbabilities out;
  out.pure_a = std::pow(static_cast<double>(s.p) / n, sf);
  out.pure_b = std::pow(static_cast<double>(s.q) / n, sf);
  out.mixed = s.features == 1 ? 0.0 : 1.0 - out.pure_a - out.pure_b;
  return out;
}

double MergeCounts::conditional_odds() const {
  if (pure_b == 0) {
    return pure_a > 0 ? std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::quiet_NaN();
  }
  return static_cast<double>(pure_a) / static_cast<double>(pure_b);
}

MergeCounts simulate_merge(const MergeScenario& s, std::int64_t trials, std::uint64_t seed,
                           int workers) {
  s.validate();
  if (trials < 1) throw InputError("simulate_merge needs at least one trial");
  const double p_a = static_cast<double>(s.p) / static_cast<double>(s.p + s.q);

  // 0 = pure A, 1 = pure B, 2 = mixed
  std::vector<std::uint8_t> outcome(static_cast<std::size_t>(trials));
  parallel_for(outcome.size(), workers, [&](std::size_t t) {
    SplitMix64 rng(derive_seed(seed, StreamKind::kTrial, t));
    std::int64_t from_a = 0;
    for (std::int64_t f = 0; f < s.features; ++f) from_a += rng.uniform() < p_a ? 1 : 0;
    outcome[t] = from_a == s.features ? 0 : (from_a == 0 ? 1 : 2);
  });

  MergeCounts counts;
  for (auto o : outcome) {
    if (o == 0) {
      ++counts.pure_a;
    } else if (o == 1) {
      ++counts.pure_b;
    } else {
      ++counts.mixed;
    }
  }
  return counts;
}

}  // namespace landscape_lab
