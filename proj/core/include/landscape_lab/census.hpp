#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "landscape_lab/abstraction.hpp"
#include "landscape_lab/dynamics.hpp"
#include "landscape_lab/landscape.hpp"

namespace landscape_lab {

// Monte Carlo basin census.
//
// Level a is simulated on E(psi^(a)(z)) over the base memories. With
// temper_levels the inverse temperature becomes beta c_a^2 at level a.
// Corrupted queries are drawn in the level's space from
// N(psi^(a)^{-1}(centroid), sigma_a^2 I), sigma_a = query_sigma by default or
// query_sigma / c_a (one fixed distribution on H) with fixed_level_sigma off.
// The query and probe streams depend only on (seed, item index), so every
// level sees the same noise.
struct CensusConfig {
  std::size_t n_queries = 5000;
  // <= 0 selects 1.5 x the memory-set radius.
  double query_sigma = 0.0;
  std::uint64_t seed = 0;
  // Empty selects every level of the hierarchy.
  std::vector<int> levels;
  double probe_sigma = 0.05;
  int probes_per_memory = 4;
  int bootstrap_rounds = 20;
  bool stratified_bootstrap = true;
  bool temper_levels = false;
  // true: sigma_a = query_sigma in every level's space; false: query_sigma / c_a.
  bool fixed_level_sigma = true;
  // Step sizes are divided by c_a^2 at level a.
  FlowConfig flow;
  int workers = 1;

  void validate() const;
};

inline constexpr int kPrivacyKs[] = {1, 2, 5, 10};

struct CensusReport {
  int level = 0;
  std::vector<ClassId> classes;
  std::vector<double> p_data;
  std::vector<double> p_gen;
  ClassId majority_class = 0;
  // p_gen(c_maj) - p_data(c_maj)
  double amplification = 0.0;
  double amplification_stderr = 0.0;
  // Mean pairwise distance among terminals, measured in the level's space.
  double diversity_mean_pairwise = 0.0;
  // k -> mean over terminals of the mean distance from the terminal's
  // pullback to its k nearest memories (k clipped to the memory count).
  std::map<int, double> privacy_knn_distance;
  std::size_t n_queries = 0;
  std::size_t failures = 0;
  // False when more than 1% of the flows failed or did not converge.
  bool valid = true;
};

// Energy used for level `level` of a census.
EnergyLandscape census_level_landscape(const EnergyLandscape& base,
                                       const AbstractionHierarchy& hierarchy, int level,
                                       bool temper_levels);

std::vector<CensusReport> run_census(const EnergyLandscape& base,
                                     const AbstractionHierarchy& hierarchy,
                                     const CensusConfig& config);

struct BiasVarianceReport {
  int level = 0;
  std::vector<ClassId> classes;
  // Mean over probes of (E_boot[fhat(x0)] - f(x0)), per class.
  std::vector<double> bias_per_class;
  // Mean over probes of E_boot |fhat(x0) - E_boot fhat(x0)|^2.
  double variance_mean = 0.0;
  std::size_t n_probes = 0;
  std::size_t failures = 0;
};

struct BiasProbe {
  // Probe location in H.
  Vector x0;
  // Class of the memory the probe was generated from.
  ClassId label = 0;
};

// Probes x0 = x_i + probe_sigma * xi, probes_per_memory per memory.
std::vector<BiasProbe> make_bias_probes(const MemorySet& memories, const CensusConfig& config);

// Multiplicity vectors for bootstrap_rounds resamples of the memory set.
std::vector<std::vector<double>> bootstrap_resamples(const MemorySet& memories,
                                                     const CensusConfig& config);

// Bias and variance at one level for explicit probes and resamples; every
// resample is weighted equally.
BiasVarianceReport bias_variance_from_resamples(const EnergyLandscape& base,
                                                const AbstractionHierarchy& hierarchy,
                                                int level, const std::vector<BiasProbe>& probes,
                                                const std::vector<std::vector<double>>& resamples,
                                                const CensusConfig& config);

std::vector<BiasVarianceReport> bias_variance_probes(const EnergyLandscape& base,
                                                     const AbstractionHierarchy& hierarchy,
                                                     const CensusConfig& config);

struct SweepRow {
  int level = 0;
  double amplification = 0.0;
  double amplification_stderr = 0.0;
  double diversity = 0.0;
  double privacy_k1 = 0.0;
};

// Census over every level; needs a hierarchy with at least three levels.
std::vector<SweepRow> amplification_sweep(const EnergyLandscape& base,
                                          const AbstractionHierarchy& hierarchy,
                                          const CensusConfig& config);

}  // namespace landscape_lab
