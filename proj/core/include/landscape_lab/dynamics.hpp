#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "landscape_lab/abstraction.hpp"
#include "landscape_lab/landscape.hpp"

namespace landscape_lab {

// Explicit Euler discretization of tau dx/dt = -grad E(x).
struct FlowConfig {
  // Step size eta; each step moves by (eta / tau_rate) * grad before
  // backtracking.
  double step_size = 1.0;
  double grad_tol = 1e-8;
  std::size_t max_steps = 20000;
  // Time scale of the flow; changes the parameterization, never the terminal.
  double tau_rate = 1.0;

  void validate() const;
};

// True when step_size / tau_rate * lipschitz < 2. Otherwise writes a warning
// to `warn` (if given) and returns false.
bool check_stability(const FlowConfig& config, double lipschitz, std::ostream* warn);

struct TrajectoryPoint {
  Vector x;
  double energy = 0.0;
};

struct FlowResult {
  Vector terminal;
  std::size_t steps_taken = 0;
  bool converged = false;
  double energy = 0.0;
  double grad_norm = 0.0;
  // Nearest level-0 memory to the pullback of the terminal.
  std::optional<std::size_t> basin_memory_index;
  std::optional<std::size_t> merged_cluster_id;
};

// Descends from `start` until |grad E| < grad_tol or max_steps accepted
// steps. A step that would raise the energy is halved until it does not, so
// the recorded energies are non-increasing. Throws NumericalError (with the
// step index) on a non-finite energy or gradient.
FlowResult flow(const Energy& energy, const Vector& start, const FlowConfig& config,
                std::vector<TrajectoryPoint>* trajectory = nullptr);

// Index of the memory nearest to psi^(level)(terminal); ties go to the lower
// index. Memories with zero multiplicity are skipped.
std::size_t basin_memory(const EnergyLandscape& landscape, const AbstractionHierarchy* hierarchy,
                         int level, const Vector& terminal);

struct MinimaSearch {
  std::vector<Vector> minima;
  // Number of converged starts that landed on each minimum.
  std::vector<std::size_t> hits;
  // Starts whose flow threw a NumericalError.
  std::size_t failed = 0;
  // Starts that ran out of steps.
  std::size_t unconverged = 0;
};

// Multistart flow; converged terminals closer than dedup_radius to an earlier
// minimum (in start order) are merged into it.
MinimaSearch find_minima(const Energy& energy, const std::vector<Vector>& starts,
                         const FlowConfig& config, double dedup_radius, int workers = 1);

struct BaseMinimum {
  Vector point;
  std::size_t memory_index = 0;
};

struct MergedMinimum {
  Vector center;
  // Memory indices of the base minima that fell within epsilon.
  std::vector<std::size_t> constituent_indices;
  double epsilon = 0.0;
};

// For every level minimum, collects the base minima whose encoding lies
// within epsilon of it and reports those with at least two constituents.
// epsilon == 0 yields no merges; negative epsilon is an input error.
std::vector<MergedMinimum> detect_merged(const std::vector<Vector>& level_minima,
                                         const std::vector<BaseMinimum>& base_minima,
                                         const std::function<Vector(const Vector&)>& encode,
                                         double epsilon);

// Sets merged_cluster_id on every result whose terminal lies within the
// cluster's epsilon of a merged centre (closest centre wins).
void assign_merged_clusters(std::vector<FlowResult>& results,
                            const std::vector<MergedMinimum>& merged);

// Minimizes the energy over the convex hull of the constituents by projected
// gradient descent on the convex weights. Starts from the barycentre, each
// vertex, and `restarts - 1` random weights. Needs at least two constituents.
Vector merged_minimum_locate(const Energy& energy, const std::vector<Vector>& constituents,
                             int iters, int restarts, std::uint64_t seed);

// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& v);

}  // namespace landscape_lab
