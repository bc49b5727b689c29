#include "landscape_lab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/parallel.hpp"
#include "landscape_lab/random.hpp"

namespace landscape_lab {

void FlowConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw InputError("step_size must be positive");
  if (!(grad_tol > 0.0)) throw InputError("grad_tol must be positive");
  if (max_steps == 0) throw InputError("max_steps must be positive");
  if (!(tau_rate > 0.0) || !std::isfinite(tau_rate)) throw InputError("tau_rate must be positive");
}

bool check_stability(const FlowConfig& config, double lipschitz, std::ostream* warn) {
  const double product = config.step_size / config.tau_rate * lipschitz;
  if (product < 2.0) return true;
  if (warn) {
    *warn << "warning: step_size/tau_rate * lipschitz = " << product
          << " >= 2; explicit steps will rely on backtracking\n";
  }
  return false;
}

FlowResult flow(const Energy& energy, const Vector& start, const FlowConfig& config,
                std::vector<TrajectoryPoint>* trajectory) {
  config.validate();
  if (start.size() != energy.dim()) {
    throw InputError("start has dimension " + std::to_string(start.size()) + ", expected " +
                     std::to_string(energy.dim()));
  }
  const double base_step = config.step_size / config.tau_rate;
  constexpr double kMinStepFraction = 1e-20;

  FlowResult result;
  Vector x = start;
  Vector g;
  double e = energy.value_and_gradient(x, g);
  std::size_t step = 0;
  // `at` is the index of the iterate being evaluated; 0 is the start.
  auto check_finite = [](double value, const Vector& grad, std::size_t at) {
    if (!std::isfinite(value) || !grad.allFinite()) {
      throw NumericalError("non-finite energy or gradient at step " + std::to_string(at), at);
    }
  };
  check_finite(e, g, 0);
  if (trajectory) trajectory->push_back({x, e});

  while (true) {
    const double gnorm = g.norm();
    if (gnorm < config.grad_tol) {
      result.converged = true;
      break;
    }
    if (step >= config.max_steps) break;

    double s = base_step;
    bool accepted = false;
    Vector x_next;
    Vector g_next;
    double e_next = 0.0;
    while (s >= base_step * kMinStepFraction) {
      x_next = x - s * g;
      e_next = energy.value_and_gradient(x_next, g_next);
      check_finite(e_next, g_next, step + 1);
      // Rounding slack: near a minimum the true decrease can fall below one
      // ulp of the energy.
      if (e_next <= e + std::max(1e-13, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(e))) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    // No descent possible at machine precision; report as not converged.
    if (!accepted) break;
    ++step;
    x = std::move(x_next);
    g = std::move(g_next);
    e = e_next;
    if (trajectory) trajectory->push_back({x, e});
  }

  result.terminal = std::move(x);
  result.steps_taken = step;
  result.energy = e;
  result.grad_norm = g.norm();
  return result;
}

std::size_t basin_memory(const EnergyLandscape& landscape, const AbstractionHierarchy* hierarchy,
                         int level, const Vector& terminal) {
  const Vector x = hierarchy ? hierarchy->decode(level, terminal) : terminal;
  return landscape.nearest_present(x);
}

MinimaSearch find_minima(const Energy& energy, const std::vector<Vector>& starts,
                         const FlowConfig& config, double dedup_radius, int workers) {
  if (starts.empty()) throw InputError("find_minima needs at least one start");
  if (!(dedup_radius >= 0.0)) throw InputError("dedup_radius must be non-negative");
  config.validate();

  struct Outcome {
    bool failed = false;
    FlowResult result;
  };
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), workers, [&](std::size_t i) {
    try {
      outcomes[i].result = flow(energy, starts[i], config);
    } catch (const NumericalError&) {
      outcomes[i].failed = true;
    }
  });

  MinimaSearch search;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++search.failed;
      continue;
    }
    if (!o.result.converged) {
      ++search.unconverged;
      continue;
    }
    bool merged = false;
    for (std::size_t m = 0; m < search.minima.size(); ++m) {
      if ((search.minima[m] - o.result.terminal).norm() < dedup_radius) {
        ++search.hits[m];
        merged = true;
        break;
      }
    }
    if (!merged) {
      search.minima.push_back(o.result.terminal);
      search.hits.push_back(1);
    }
  }
  return search;
}

std::vector<MergedMinimum> detect_merged(const std::vector<Vector>& level_minima,
                                         const std::vector<BaseMinimum>& base_minima,
                                         const std::function<Vector(const Vector&)>& encode,
                                         double epsilon) {
  if (epsilon < 0.0 || std::isnan(epsilon)) throw InputError("epsilon must be non-negative");
  std::vector<MergedMinimum> merged;
  if (epsilon == 0.0) return merged;

  std::vector<Vector> encoded;
  encoded.reserve(base_minima.size());
  for (const auto& b : base_minima) encoded.push_back(encode(b.point));

  for (const auto& center : level_minima) {
    MergedMinimum mm;
    mm.center = center;
    mm.epsilon = epsilon;
    for (std::size_t i = 0; i < base_minima.size(); ++i) {
      if (encoded[i].size() != center.size()) {
        throw InputError("encoded base minimum and level minimum differ in dimension");
      }
      if ((encoded[i] - center).norm() <= epsilon) {
        mm.constituent_indices.push_back(base_minima[i].memory_index);
      }
    }
    if (mm.constituent_indices.size() >= 2) merged.push_back(std::move(mm));
  }
  return merged;
}

void assign_merged_clusters(std::vector<FlowResult>& results,
                            const std::vector<MergedMinimum>& merged) {
  for (auto& r : results) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < merged.size(); ++k) {
      const double dist = (r.terminal - merged[k].center).norm();
      if (dist <= merged[k].epsilon && dist < best) {
        best = dist;
        r.merged_cluster_id = k;
      }
    }
  }
}

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[static_cast<std::size_t>(j)];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

Vector merged_minimum_locate(const Energy& energy, const std::vector<Vector>& constituents,
                             int iters, int restarts, std::uint64_t seed) {
  if (constituents.size() < 2) throw InputError("merged_minimum_locate needs at least two constituents");
  if (iters < 1 || restarts < 1) throw InputError("iters and restarts must be positive");
  const Eigen::Index d = energy.dim();
  const auto n = static_cast<Eigen::Index>(constituents.size());
  Matrix hull(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (constituents[static_cast<std::size_t>(i)].size() != d) {
      throw InputError("constituent dimension does not match the energy");
    }
    hull.col(i) = constituents[static_cast<std::size_t>(i)];
  }

  auto objective = [&](const Vector& alpha, Vector* grad_alpha) {
    const Vector x = hull * alpha;
    Vector g;
    const double e = energy.value_and_gradient(x, g);
    if (grad_alpha) *grad_alpha = hull.transpose() * g;
    return e;
  };

  Vector best_alpha;
  double best_energy = std::numeric_limits<double>::infinity();
  // barycentre, then every vertex, then random weights
  const int total = restarts + static_cast<int>(n);
  for (int r = 0; r < total; ++r) {
    Vector alpha(n);
    if (r == 0) {
      alpha.setConstant(1.0 / static_cast<double>(n));
    } else if (r <= n) {
      alpha.setZero();
      alpha[r - 1] = 1.0;
    } else {
      SplitMix64 rng(derive_seed(seed, StreamKind::kRestart, static_cast<std::uint64_t>(r)));
      for (Eigen::Index i = 0; i < n; ++i) alpha[i] = -std::log(1.0 - rng.uniform());
      alpha /= alpha.sum();
    }
    Vector grad;
    double f = objective(alpha, &grad);
    double t = 1.0;
    for (int it = 0; it < iters; ++it) {
      Vector candidate;
      double f_candidate = 0.0;
      bool moved = false;
      while (t > 1e-20) {
        candidate = project_to_simplex(alpha - t * grad);
        const Vector delta = candidate - alpha;
        f_candidate = objective(candidate, nullptr);
        if (f_candidate <= f + grad.dot(delta) + delta.squaredNorm() / (2.0 * t)) {
          moved = delta.norm() > 1e-15;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
      alpha = candidate;
      f = objective(alpha, &grad);
      t *= 2.0;
    }
    if (f < best_energy) {
      best_energy = f;
      best_alpha = alpha;
    }
  }
  return hull * best_alpha;
}

}  // namespace landscape_lab
