#include "landscape_lab/census.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/parallel.hpp"
#include "landscape_lab/random.hpp"
#include "landscape_lab/stats.hpp"

namespace landscape_lab {

void CensusConfig::validate() const {
  if (n_queries == 0) throw InputError("n_queries must be positive");
  if (std::isnan(query_sigma)) throw InputError("query_sigma must be a number");
  if (!(probe_sigma >= 0.0)) throw InputError("probe_sigma must be non-negative");
  if (probes_per_memory < 1) throw InputError("probes_per_memory must be positive");
  if (bootstrap_rounds < 1) throw InputError("bootstrap_rounds must be positive");
  if (workers < 1) throw InputError("workers must be positive");
  flow.validate();
}

EnergyLandscape census_level_landscape(const EnergyLandscape& base,
                                       const AbstractionHierarchy& hierarchy, int level,
                                       bool temper_levels) {
  const double c = hierarchy.contraction(level);
  if (!temper_levels || level == 0) return base;
  return base.with_beta(base.beta() * c * c);
}

namespace {

std::vector<int> resolve_levels(const AbstractionHierarchy& hierarchy, const CensusConfig& config) {
  std::vector<int> levels = config.levels;
  if (levels.empty()) {
    for (int a = 0; a <= hierarchy.top_level(); ++a) levels.push_back(a);
  }
  for (int a : levels) hierarchy.contraction(a);
  return levels;
}

FlowConfig level_flow(const CensusConfig& config, double c) {
  FlowConfig f = config.flow;
  f.step_size = config.flow.step_size / (c * c);
  return f;
}

Vector standard_normal(int dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int k = 0; k < dim; ++k) v[k] = normal(rng);
  return v;
}

struct QueryOutcome {
  bool ok = false;
  Vector terminal;
  std::size_t class_index = 0;
  std::vector<double> privacy;  // parallel to kPrivacyKs
};

}  // namespace

std::vector<CensusReport> run_census(const EnergyLandscape& base,
                                     const AbstractionHierarchy& hierarchy,
                                     const CensusConfig& config) {
  config.validate();
  if (base.dim() != hierarchy.dim()) {
    throw InputError("landscape dimension does not match hierarchy dimension");
  }
  const MemorySet& mem = base.memories();
  const int d = mem.dim();
  const std::size_t n_classes = mem.classes().size();
  const double sigma = config.query_sigma > 0.0 ? config.query_sigma : 1.5 * mem.radius();
  if (!(sigma > 0.0)) throw InputError("query_sigma resolved to zero (single-point memory set?)");
  const Vector centroid = mem.centroid();

  std::vector<double> p_data(n_classes, 0.0);
  {
    const auto counts = mem.class_counts();
    for (std::size_t c = 0; c < n_classes; ++c) {
      p_data[c] = static_cast<double>(counts[c]) / static_cast<double>(mem.size());
    }
  }
  const std::size_t majority =
      static_cast<std::size_t>(std::max_element(p_data.begin(), p_data.end()) - p_data.begin());

  std::vector<Vector> noise(config.n_queries);
  for (std::size_t q = 0; q < config.n_queries; ++q) {
    noise[q] = standard_normal(d, derive_seed(config.seed, StreamKind::kQuery, q));
  }

  std::vector<CensusReport> reports;
  for (int level : resolve_levels(hierarchy, config)) {
    const double c = hierarchy.contraction(level);
    const EnergyLandscape landscape =
        census_level_landscape(base, hierarchy, level, config.temper_levels);
    const LevelEnergy energy(hierarchy, landscape, level);
    const FlowConfig fcfg = level_flow(config, c);
    const Vector center = hierarchy.encode(level, centroid);
    const double level_sigma = config.fixed_level_sigma ? sigma : sigma / c;

    std::vector<QueryOutcome> out(config.n_queries);
    parallel_for(config.n_queries, config.workers, [&](std::size_t q) {
      QueryOutcome& o = out[q];
      FlowResult r;
      try {
        r = flow(energy, Vector(center + level_sigma * noise[q]), fcfg);
      } catch (const NumericalError&) {
        return;
      }
      if (!r.converged) return;
      const Vector x = hierarchy.decode(level, r.terminal);
      Vector dist = mem.distances(x);
      std::sort(dist.begin(), dist.end());
      o.class_index = mem.class_index(mem.label(mem.nearest(x)));
      for (int k : kPrivacyKs) {
        const auto kk = static_cast<Eigen::Index>(std::min<std::size_t>(static_cast<std::size_t>(k), mem.size()));
        o.privacy.push_back(dist.head(kk).mean());
      }
      o.terminal = std::move(r.terminal);
      o.ok = true;
    });

    CensusReport rep;
    rep.level = level;
    rep.classes = mem.classes();
    rep.p_data = p_data;
    rep.majority_class = mem.classes()[majority];
    rep.n_queries = config.n_queries;
    rep.p_gen.assign(n_classes, 0.0);
    std::vector<double> privacy_sum(std::size(kPrivacyKs), 0.0);
    std::vector<const Vector*> terminals;
    for (const auto& o : out) {
      if (!o.ok) {
        ++rep.failures;
        continue;
      }
      rep.p_gen[o.class_index] += 1.0;
      for (std::size_t k = 0; k < privacy_sum.size(); ++k) privacy_sum[k] += o.privacy[k];
      terminals.push_back(&o.terminal);
    }
    const auto n_ok = static_cast<double>(terminals.size());
    rep.valid = rep.failures * 100 <= config.n_queries && !terminals.empty();
    if (!terminals.empty()) {
      for (double& p : rep.p_gen) p /= n_ok;
      for (std::size_t k = 0; k < privacy_sum.size(); ++k) {
        rep.privacy_knn_distance[kPrivacyKs[k]] = privacy_sum[k] / n_ok;
      }
      rep.amplification = rep.p_gen[majority] - p_data[majority];
      rep.amplification_stderr = binomial_stderr(rep.p_gen[majority], n_ok);

      std::vector<double> row_sum(terminals.size(), 0.0);
      parallel_for(terminals.size(), config.workers, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = i + 1; j < terminals.size(); ++j) {
          acc += (*terminals[i] - *terminals[j]).norm();
        }
        row_sum[i] = acc;
      });
      double total = 0.0;
      for (double v : row_sum) total += v;
      const double pairs = n_ok * (n_ok - 1.0) / 2.0;
      rep.diversity_mean_pairwise = pairs > 0.0 ? total / pairs : 0.0;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<BiasProbe> make_bias_probes(const MemorySet& memories, const CensusConfig& config) {
  std::vector<BiasProbe> probes;
  const auto per = static_cast<std::size_t>(config.probes_per_memory);
  for (std::size_t i = 0; i < memories.size(); ++i) {
    for (std::size_t j = 0; j < per; ++j) {
      const Vector xi =
          standard_normal(memories.dim(), derive_seed(config.seed, StreamKind::kProbe, i * per + j));
      probes.push_back({Vector(memories.point(i) + config.probe_sigma * xi), memories.label(i)});
    }
  }
  return probes;
}

std::vector<std::vector<double>> bootstrap_resamples(const MemorySet& memories,
                                                     const CensusConfig& config) {
  std::vector<std::vector<std::size_t>> groups;
  if (config.stratified_bootstrap) {
    groups.resize(memories.classes().size());
    for (std::size_t i = 0; i < memories.size(); ++i) {
      groups[memories.class_index(memories.label(i))].push_back(i);
    }
  } else {
    groups.emplace_back();
    for (std::size_t i = 0; i < memories.size(); ++i) groups[0].push_back(i);
  }

  std::vector<std::vector<double>> resamples;
  for (int r = 0; r < config.bootstrap_rounds; ++r) {
    SplitMix64 rng(derive_seed(config.seed, StreamKind::kBootstrap, static_cast<std::uint64_t>(r)));
    std::vector<double> mult(memories.size(), 0.0);
    for (const auto& g : groups) {
      std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
      for (std::size_t k = 0; k < g.size(); ++k) mult[g[pick(rng)]] += 1.0;
    }
    resamples.push_back(std::move(mult));
  }
  return resamples;
}

BiasVarianceReport bias_variance_from_resamples(const EnergyLandscape& base,
                                                const AbstractionHierarchy& hierarchy,
                                                int level, const std::vector<BiasProbe>& probes,
                                                const std::vector<std::vector<double>>& resamples,
                                                const CensusConfig& config) {
  config.validate();
  if (probes.empty()) throw InputError("bias/variance needs at least one probe");
  if (resamples.empty()) throw InputError("bias/variance needs at least one resample");
  const MemorySet& mem = base.memories();
  const std::size_t n_classes = mem.classes().size();
  const double c = hierarchy.contraction(level);
  const FlowConfig fcfg = level_flow(config, c);
  const double beta = census_level_landscape(base, hierarchy, level, config.temper_levels).beta();

  std::vector<Vector> starts;
  starts.reserve(probes.size());
  for (const auto& p : probes) starts.push_back(hierarchy.encode(level, p.x0));

  // fhat[r][probe] = class index, or n_classes on failure
  const std::size_t n_rounds = resamples.size();
  std::vector<std::vector<std::size_t>> fhat(n_rounds, std::vector<std::size_t>(probes.size(), n_classes));
  for (std::size_t r = 0; r < n_rounds; ++r) {
    const EnergyLandscape landscape(mem, beta, resamples[r]);
    const LevelEnergy energy(hierarchy, landscape, level);
    parallel_for(probes.size(), config.workers, [&](std::size_t i) {
      try {
        const FlowResult res = flow(energy, starts[i], fcfg);
        if (!res.converged) return;
        const std::size_t m = landscape.nearest_present(hierarchy.decode(level, res.terminal));
        fhat[r][i] = mem.class_index(mem.label(m));
      } catch (const NumericalError&) {
      }
    });
  }

  BiasVarianceReport rep;
  rep.level = level;
  rep.classes = mem.classes();
  rep.bias_per_class.assign(n_classes, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    std::vector<double> mean(n_classes, 0.0);
    std::size_t ok = 0;
    for (std::size_t r = 0; r < n_rounds; ++r) {
      if (fhat[r][i] == n_classes) {
        ++rep.failures;
        continue;
      }
      mean[fhat[r][i]] += 1.0;
      ++ok;
    }
    if (ok == 0) continue;
    for (double& m : mean) m /= static_cast<double>(ok);
    double var = 0.0;
    for (std::size_t r = 0; r < n_rounds; ++r) {
      if (fhat[r][i] == n_classes) continue;
      for (std::size_t k = 0; k < n_classes; ++k) {
        const double diff = (fhat[r][i] == k ? 1.0 : 0.0) - mean[k];
        var += diff * diff;
      }
    }
    rep.variance_mean += var / static_cast<double>(ok);
    const std::size_t truth = mem.class_index(probes[i].label);
    for (std::size_t k = 0; k < n_classes; ++k) {
      rep.bias_per_class[k] += mean[k] - (k == truth ? 1.0 : 0.0);
    }
    ++used;
  }
  rep.n_probes = used;
  if (used > 0) {
    rep.variance_mean /= static_cast<double>(used);
    for (double& b : rep.bias_per_class) b /= static_cast<double>(used);
  }
  return rep;
}

std::vector<BiasVarianceReport> bias_variance_probes(const EnergyLandscape& base,
                                                     const AbstractionHierarchy& hierarchy,
                                                     const CensusConfig& config) {
  config.validate();
  if (!(config.probe_sigma > 0.0)) throw InputError("probe_sigma must be positive");
  if (config.bootstrap_rounds < 10) throw InputError("bootstrap_rounds must be at least 10");
  const auto probes = make_bias_probes(base.memories(), config);
  const auto resamples = bootstrap_resamples(base.memories(), config);
  std::vector<BiasVarianceReport> out;
  for (int level : resolve_levels(hierarchy, config)) {
    out.push_back(bias_variance_from_resamples(base, hierarchy, level, probes, resamples, config));
  }
  return out;
}

std::vector<SweepRow> amplification_sweep(const EnergyLandscape& base,
                                          const AbstractionHierarchy& hierarchy,
                                          const CensusConfig& config) {
  if (hierarchy.top_level() < 2) throw InputError("amplification sweep needs at least three levels");
  CensusConfig all = config;
  all.levels.clear();
  std::vector<SweepRow> rows;
  for (const auto& rep : run_census(base, hierarchy, all)) {
    rows.push_back({rep.level, rep.amplification, rep.amplification_stderr,
                    rep.diversity_mean_pairwise, rep.privacy_knn_distance.at(1)});
  }
  return rows;
}

}  // namespace landscape_lab
