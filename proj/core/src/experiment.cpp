#include "landscape_lab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "landscape_lab/abstraction.hpp"
#include "landscape_lab/census.hpp"
#include "landscape_lab/dynamics.hpp"
#include "landscape_lab/errors.hpp"
#include "landscape_lab/gridsim.hpp"
#include "landscape_lab/knn.hpp"
#include "landscape_lab/landscape.hpp"
#include "landscape_lab/oddsmodel.hpp"
#include "landscape_lab/parallel.hpp"
#include "landscape_lab/random.hpp"
#include "landscape_lab/stats.hpp"

#ifndef LANDSCAPE_LAB_VERSION
#define LANDSCAPE_LAB_VERSION "0.0.0"
#endif

namespace landscape_lab {

namespace {

using Schema = std::vector<ParamSpec>;

void append(Schema& dst, const Schema& src) { dst.insert(dst.end(), src.begin(), src.end()); }

const Schema kMemoryKeys = {
    {"memories", "", "memory CSV (x_0..x_{d-1},label); empty generates Gaussian blobs"},
    {"dim", "2", "dimension of generated memories"},
    {"class_counts", "9,1", "points per class for generated memories"},
    {"spread", "0.5", "per-axis standard deviation of each blob"},
    {"separation", "2.5", "distance between consecutive class centres"},
    {"min_spacing", "0.05", "minimum distance between generated points"},
    {"mirror", "false", "two classes: class 1 mirrors class 0"},
    {"beta", "10", "inverse temperature"},
};

const Schema kHierarchyKeys = {
    {"decoder", "diagonal", "diagonal | tanh"},
    {"top_level", "4", "highest abstraction level"},
    {"ratio", "0.9", "c_a = ratio^a"},
    {"factors", "", "explicit contraction factors, overrides ratio/top_level"},
    {"tanh_scale", "1", "saturation scale of the tanh decoder"},
};

const Schema kFlowKeys = {
    {"step_size", "1", "explicit Euler step"},
    {"grad_tol", "1e-8", "stop when |grad| falls below this"},
    {"max_steps", "20000", "accepted steps per flow"},
    {"tau_rate", "1", "time scale of the flow"},
};

const Schema kCensusKeys = {
    {"n_queries", "5000", "corrupted queries per level"},
    {"query_sigma", "0", "query spread; <= 0 selects 1.5x the memory radius"},
    {"levels", "", "levels to sweep; empty sweeps all"},
    {"temper_levels", "false", "use beta c_a^2 at level a"},
    {"fixed_level_sigma", "true", "query_sigma in every level's space (else query_sigma / c_a)"},
};

Schema make_schema(Experiment e) {
  Schema s;
  switch (e) {
    case Experiment::kCensus:
      append(s, kMemoryKeys);
      append(s, kHierarchyKeys);
      append(s, kFlowKeys);
      append(s, kCensusKeys);
      append(s, {{"minima_starts", "64", "extra random starts for minima.csv"},
                 {"dedup_radius", "0", "minima merge radius; <= 0 selects 10% of the diameter"},
                 {"epsilon", "0", "merged-minimum radius; <= 0 selects 10% of the diameter"},
                 {"trajectories", "0", "query trajectories dumped to trajectory.csv"},
                 {"trajectory_level", "0", "level of the dumped trajectories"}});
      break;
    case Experiment::kPrivacy:
      append(s, kMemoryKeys);
      append(s, kHierarchyKeys);
      append(s, kFlowKeys);
      append(s, kCensusKeys);
      append(s, {{"replicates", "20", "independently generated memory sets"}});
      break;
    case Experiment::kBiasvar:
      append(s, kMemoryKeys);
      append(s, kHierarchyKeys);
      append(s, kFlowKeys);
      append(s, {{"levels", "", "levels to sweep; empty sweeps all"},
                 {"temper_levels", "false", "use beta c_a^2 at level a"},
                 {"probe_sigma", "0.05", "probe offset from its memory"},
                 {"probes_per_memory", "4", "probes per memory"},
                 {"bootstrap_rounds", "20", "bootstrap resamples"},
                 {"stratified_bootstrap", "true", "resample within each class"}});
      break;
    case Experiment::kSmoothness:
      append(s, kMemoryKeys);
      append(s, kHierarchyKeys);
      append(s, {{"probes", "256", "probe points per level"},
                 {"probe_radius", "0", "probe ball radius in H (divided by c_a per level); <= 0 selects twice the memory radius"},
                 {"fd_step", "1e-4", "finite-difference step"}});
      break;
    case Experiment::kKnn:
      append(s, kMemoryKeys);
      append(s, kFlowKeys);
      append(s, {{"n_queries", "200", "queries"},
                 {"query_sigma", "0", "<= 0 selects 1.5x the memory radius"},
                 {"taus", "0.05,0.2,1,5", "temperatures; the landscape uses beta = 2 / tau"}});
      break;
    case Experiment::kGrid:
      append(s, {{"side", "512", "grid side, a power of two"},
                 {"p_red", "0.5,0.6,0.7,0.8,0.9", "initial red shares"},
                 {"levels", "3", "coarsening steps"},
                 {"pbm", "false", "write a bitmap per curve and level"}});
      break;
    case Experiment::kOdds:
      append(s, {{"p", "2,3,3", "majority minima counts"},
                 {"q", "1,1,2", "minority minima counts"},
                 {"S", "2,3,4", "exclusive features"},
                 {"trials", "1000000", "Monte Carlo trials per scenario"}});
      break;
  }
  return s;
}

const std::set<std::string> kGlobalKeys = {"seed", "out_dir", "format", "workers", "experiment"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Typed access to the resolved parameter table.
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& values) : values_(values) {}

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InputError("missing config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const { return parse_real(key, str(key)); }

  std::int64_t integer(const std::string& key) const { return parse_int(key, str(key)); }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InputError("config key '" + key + "': expected true or false, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : items(key)) out.push_back(parse_real(key, item));
    return out;
  }

  std::vector<std::int64_t> integers(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& item : items(key)) out.push_back(parse_int(key, item));
    return out;
  }

 private:
  std::vector<std::string> items(const std::string& key) const {
    std::vector<std::string> out;
    const std::string& v = str(key);
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw InputError("config key '" + key + "': empty list item");
      out.push_back(item);
    }
    return out;
  }

  static double parse_real(const std::string& key, const std::string& v) {
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
      throw InputError("config key '" + key + "': expected a finite number, got '" + v + "'");
    }
    return x;
  }

  static std::int64_t parse_int(const std::string& key, const std::string& v) {
    std::int64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw InputError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
    return x;
  }

  const std::map<std::string, std::string>& values_;
};

int positive_int(const Params& p, const std::string& key) {
  const auto v = p.integer(key);
  if (v < 1 || v > 1'000'000'000) throw InputError("config key '" + key + "' must be positive");
  return static_cast<int>(v);
}

MemorySet memories_from(const Params& p, std::uint64_t seed) {
  if (!p.str("memories").empty()) return read_memory_csv(p.str("memories"));
  const auto dim = positive_int(p, "dim");
  BlobSpec spec;
  for (auto c : p.integers("class_counts")) {
    if (c < 1) throw InputError("config key 'class_counts' needs positive counts");
    spec.class_counts.push_back(static_cast<std::size_t>(c));
  }
  if (spec.class_counts.empty()) throw InputError("config key 'class_counts' is empty");
  spec.spread = p.real("spread");
  spec.separation = p.real("separation");
  spec.min_spacing = p.real("min_spacing");
  spec.mirror = p.flag("mirror");
  return generate_blobs(dim, spec, seed);
}

double beta_from(const Params& p) {
  const double beta = p.real("beta");
  if (!(beta > 0.0)) throw InputError("config key 'beta' must be positive");
  return beta;
}

AbstractionHierarchy hierarchy_from(const Params& p, int dim) {
  DecoderFamily family;
  if (p.str("decoder") == "diagonal") {
    family = DecoderFamily::kDiagonal;
  } else if (p.str("decoder") == "tanh") {
    family = DecoderFamily::kScaledTanh;
  } else {
    throw InputError("config key 'decoder': expected diagonal or tanh, got '" + p.str("decoder") + "'");
  }
  const double scale = p.real("tanh_scale");
  auto factors = p.reals("factors");
  if (!factors.empty()) return AbstractionHierarchy(family, std::move(factors), dim, scale);
  const auto top = p.integer("top_level");
  if (top < 0 || top > 64) throw InputError("config key 'top_level' must lie in [0, 64]");
  return AbstractionHierarchy::geometric(family, static_cast<int>(top), p.real("ratio"), dim, scale);
}

FlowConfig flow_from(const Params& p) {
  FlowConfig f;
  f.step_size = p.real("step_size");
  f.grad_tol = p.real("grad_tol");
  const auto steps = p.integer("max_steps");
  if (steps < 1) throw InputError("config key 'max_steps' must be positive");
  f.max_steps = static_cast<std::size_t>(steps);
  f.tau_rate = p.real("tau_rate");
  f.validate();
  return f;
}

// Upper bound on the Hessian norm of the canonical energy: I - beta Cov_w,
// with Cov_w <= diameter^2 / 4.
double lipschitz_bound(const EnergyLandscape& landscape) {
  const double d = landscape.memories().diameter();
  return std::max(1.0, landscape.beta() * d * d / 4.0 - 1.0);
}

CensusConfig census_from(const Params& p, const RunConfig& rc, std::uint64_t seed) {
  CensusConfig c;
  const auto nq = p.integer("n_queries");
  if (nq < 1) throw InputError("config key 'n_queries' must be positive");
  c.n_queries = static_cast<std::size_t>(nq);
  if (c.n_queries < 100) std::cerr << "warning: n_queries < 100; statistics will be noisy\n";
  c.query_sigma = p.real("query_sigma");
  for (auto a : p.integers("levels")) c.levels.push_back(static_cast<int>(a));
  c.temper_levels = p.flag("temper_levels");
  c.fixed_level_sigma = p.flag("fixed_level_sigma");
  c.flow = flow_from(p);
  c.seed = seed;
  c.workers = rc.workers;
  return c;
}

Vector standard_normal(int dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int k = 0; k < dim; ++k) v[k] = normal(rng);
  return v;
}

std::vector<std::string> coordinate_columns(int dim) {
  std::vector<std::string> cols;
  for (int k = 0; k < dim; ++k) cols.push_back("x_" + std::to_string(k));
  return cols;
}

Table census_table(const std::vector<CensusReport>& reports) {
  Table t{"census",
          {"level", "class", "p_data", "p_gen", "amplification", "diversity", "privacy_k1",
           "privacy_k2", "privacy_k5", "privacy_k10", "n_queries", "failures"},
          {}};
  for (const auto& r : reports) {
    if (!r.valid) {
      throw NumericalError("census level " + std::to_string(r.level) + ": " +
                               std::to_string(r.failures) + " of " + std::to_string(r.n_queries) +
                               " flows failed or did not converge",
                           0);
    }
    for (std::size_t c = 0; c < r.classes.size(); ++c) {
      t.add_row({std::int64_t{r.level}, std::int64_t{r.classes[c]}, r.p_data[c], r.p_gen[c],
                 r.amplification, r.diversity_mean_pairwise, r.privacy_knn_distance.at(1),
                 r.privacy_knn_distance.at(2), r.privacy_knn_distance.at(5),
                 r.privacy_knn_distance.at(10), static_cast<std::int64_t>(r.n_queries),
                 static_cast<std::int64_t>(r.failures)});
    }
  }
  return t;
}

struct Setup {
  MemorySet memories;
  bool generated = false;
};

Setup setup_memories(const Params& p, std::uint64_t seed, std::uint64_t replicate = 0) {
  return {memories_from(p, derive_seed(seed, StreamKind::kMemories, replicate)),
          p.str("memories").empty()};
}

Table memories_table(const MemorySet& m, const std::string& name = "memories") {
  auto cols = coordinate_columns(m.dim());
  cols.push_back("label");
  Table t{name, cols, {}};
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<Cell> row;
    for (int k = 0; k < m.dim(); ++k) row.emplace_back(m.points()(k, static_cast<Eigen::Index>(i)));
    row.emplace_back(std::int64_t{m.label(i)});
    t.add_row(std::move(row));
  }
  return t;
}

std::vector<Table> run_census_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  const Setup s = setup_memories(p, rc.seed);
  const EnergyLandscape base(s.memories, beta_from(p));
  const auto hierarchy = hierarchy_from(p, s.memories.dim());
  const CensusConfig cc = census_from(p, rc, rc.seed);
  check_stability(cc.flow, lipschitz_bound(base), &std::cerr);

  std::vector<Table> tables;
  tables.push_back(census_table(run_census(base, hierarchy, cc)));

  // Minima per level from the encoded memories plus random starts drawn like
  // the census queries.
  const int d = s.memories.dim();
  const double diameter = s.memories.diameter();
  const double dedup = p.real("dedup_radius") > 0.0 ? p.real("dedup_radius") : 0.1 * diameter;
  const double eps = p.real("epsilon") > 0.0 ? p.real("epsilon") : 0.1 * diameter;
  const auto extra = p.integer("minima_starts");
  if (extra < 0) throw InputError("config key 'minima_starts' must be non-negative");
  const double sigma = cc.query_sigma > 0.0 ? cc.query_sigma : 1.5 * s.memories.radius();
  const Vector centroid = s.memories.centroid();

  std::vector<int> levels = cc.levels;
  if (levels.empty()) {
    for (int a = 0; a <= hierarchy.top_level(); ++a) levels.push_back(a);
  }

  auto starts_for = [&](int level) {
    const double c = hierarchy.contraction(level);
    std::vector<Vector> starts;
    for (std::size_t i = 0; i < s.memories.size(); ++i) {
      starts.push_back(hierarchy.encode(level, s.memories.point(i)));
    }
    const Vector center = hierarchy.encode(level, centroid);
    const double level_sigma = cc.fixed_level_sigma ? sigma : sigma / c;
    for (std::int64_t j = 0; j < extra; ++j) {
      starts.push_back(center + level_sigma * standard_normal(d, derive_seed(rc.seed, StreamKind::kRestart,
                                                                             static_cast<std::uint64_t>(j))));
    }
    return starts;
  };
  auto level_flow = [&](double c) {
    FlowConfig f = cc.flow;
    f.step_size /= c * c;
    return f;
  };

  const EnergyLandscape& base0 = base;
  const MinimaSearch base_search = find_minima(base0, starts_for(0), cc.flow, dedup, rc.workers);
  std::vector<BaseMinimum> base_minima;
  for (const auto& m : base_search.minima) base_minima.push_back({m, s.memories.nearest(m)});

  auto cols = coordinate_columns(d);
  cols.insert(cols.begin(), {"level", "min_id"});
  cols.insert(cols.end(), {"energy", "n_constituents"});
  Table minima{"minima", cols, {}};
  for (int level : levels) {
    const double c = hierarchy.contraction(level);
    const EnergyLandscape landscape = census_level_landscape(base, hierarchy, level, cc.temper_levels);
    const LevelEnergy energy(hierarchy, landscape, level);
    const MinimaSearch search =
        find_minima(energy, starts_for(level), level_flow(c), dedup / c, rc.workers);
    const double level_eps = eps / c;
    for (std::size_t m = 0; m < search.minima.size(); ++m) {
      const Vector& z = search.minima[m];
      std::int64_t constituents = 0;
      for (const auto& b : base_minima) {
        if ((hierarchy.encode(level, b.point) - z).norm() <= level_eps) ++constituents;
      }
      std::vector<Cell> row{std::int64_t{level}, static_cast<std::int64_t>(m)};
      for (int k = 0; k < d; ++k) row.emplace_back(z[k]);
      row.emplace_back(energy.value(z));
      row.emplace_back(constituents);
      minima.add_row(std::move(row));
    }
  }
  tables.push_back(std::move(minima));

  const auto n_traj = p.integer("trajectories");
  if (n_traj < 0) throw InputError("config key 'trajectories' must be non-negative");
  if (n_traj > 0) {
    const auto tl = p.integer("trajectory_level");
    if (tl < 0 || tl > hierarchy.top_level()) {
      throw InputError("config key 'trajectory_level' outside the hierarchy");
    }
    const int level = static_cast<int>(tl);
    const double c = hierarchy.contraction(level);
    const EnergyLandscape landscape = census_level_landscape(base, hierarchy, level, cc.temper_levels);
    const LevelEnergy energy(hierarchy, landscape, level);
    const Vector center = hierarchy.encode(level, centroid);
    const double level_sigma = cc.fixed_level_sigma ? sigma : sigma / c;
    auto tcols = coordinate_columns(d);
    tcols.insert(tcols.begin(), {"start_id", "step"});
    tcols.push_back("energy");
    Table traj{"trajectory", tcols, {}};
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(n_traj), cc.n_queries);
    for (std::size_t q = 0; q < count; ++q) {
      // Same start as census query q at this level.
      const Vector start =
          center + level_sigma * standard_normal(d, derive_seed(cc.seed, StreamKind::kQuery, q));
      std::vector<TrajectoryPoint> path;
      flow(energy, start, level_flow(c), &path);
      for (std::size_t st = 0; st < path.size(); ++st) {
        std::vector<Cell> row{static_cast<std::int64_t>(q), static_cast<std::int64_t>(st)};
        for (int k = 0; k < d; ++k) row.emplace_back(path[st].x[k]);
        row.emplace_back(path[st].energy);
        traj.add_row(std::move(row));
      }
    }
    tables.push_back(std::move(traj));
  }
  if (s.generated) tables.push_back(memories_table(s.memories));
  return tables;
}

std::vector<Table> run_privacy_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  const auto replicates = p.integer("replicates");
  if (replicates < 1) throw InputError("config key 'replicates' must be positive");
  if (!p.str("memories").empty() && replicates != 1) {
    throw InputError("config key 'replicates' must be 1 when memories are read from a file");
  }
  Table rows{"privacy",
             {"replicate", "level", "privacy_k1", "privacy_k2", "privacy_k5", "privacy_k10",
              "diversity", "failures"},
             {}};
  Table summary{"privacy_summary", {"metric", "increases", "replicates"}, {}};
  std::int64_t privacy_up = 0;
  std::int64_t diversity_up = 0;
  for (std::int64_t r = 0; r < replicates; ++r) {
    const auto ru = static_cast<std::uint64_t>(r);
    const Setup s = setup_memories(p, rc.seed, ru);
    const EnergyLandscape base(s.memories, beta_from(p));
    const auto hierarchy = hierarchy_from(p, s.memories.dim());
    const CensusConfig cc = census_from(p, rc, derive_seed(rc.seed, StreamKind::kQuery, ru));
    const auto reports = run_census(base, hierarchy, cc);
    census_table(reports);  // validity check
    for (const auto& rep : reports) {
      rows.add_row({r, std::int64_t{rep.level}, rep.privacy_knn_distance.at(1),
                    rep.privacy_knn_distance.at(2), rep.privacy_knn_distance.at(5),
                    rep.privacy_knn_distance.at(10), rep.diversity_mean_pairwise,
                    static_cast<std::int64_t>(rep.failures)});
    }
    if (reports.back().privacy_knn_distance.at(1) > reports.front().privacy_knn_distance.at(1)) {
      ++privacy_up;
    }
    if (reports.back().diversity_mean_pairwise > reports.front().diversity_mean_pairwise) {
      ++diversity_up;
    }
  }
  summary.add_row({std::string("privacy_k1"), privacy_up, replicates});
  summary.add_row({std::string("diversity"), diversity_up, replicates});
  return {rows, summary};
}

std::vector<Table> run_biasvar_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  const Setup s = setup_memories(p, rc.seed);
  const EnergyLandscape base(s.memories, beta_from(p));
  const auto hierarchy = hierarchy_from(p, s.memories.dim());
  CensusConfig cc;
  for (auto a : p.integers("levels")) cc.levels.push_back(static_cast<int>(a));
  cc.temper_levels = p.flag("temper_levels");
  cc.probe_sigma = p.real("probe_sigma");
  const auto ppm = p.integer("probes_per_memory");
  const auto rounds = p.integer("bootstrap_rounds");
  if (ppm < 1 || ppm > 1'000'000) throw InputError("config key 'probes_per_memory' must be positive");
  if (rounds < 1 || rounds > 1'000'000) throw InputError("config key 'bootstrap_rounds' must be positive");
  cc.probes_per_memory = static_cast<int>(ppm);
  cc.bootstrap_rounds = static_cast<int>(rounds);
  cc.stratified_bootstrap = p.flag("stratified_bootstrap");
  cc.flow = flow_from(p);
  cc.seed = rc.seed;
  cc.workers = rc.workers;
  check_stability(cc.flow, lipschitz_bound(base), &std::cerr);

  Table t{"biasvar", {"level", "class", "bias", "variance_mean"}, {}};
  for (const auto& rep : bias_variance_probes(base, hierarchy, cc)) {
    for (std::size_t c = 0; c < rep.classes.size(); ++c) {
      t.add_row({std::int64_t{rep.level}, std::int64_t{rep.classes[c]}, rep.bias_per_class[c],
                 rep.variance_mean});
    }
  }
  std::vector<Table> tables{t};
  if (s.generated) tables.push_back(memories_table(s.memories));
  return tables;
}

std::vector<Table> run_smoothness_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  const Setup s = setup_memories(p, rc.seed);
  const EnergyLandscape base(s.memories, beta_from(p));
  const auto hierarchy = hierarchy_from(p, s.memories.dim());
  SmoothnessOptions opt;
  opt.probes = positive_int(p, "probes");
  opt.probe_radius = p.real("probe_radius");
  opt.fd_step = p.real("fd_step");
  if (!(opt.fd_step > 0.0)) throw InputError("config key 'fd_step' must be positive");
  opt.seed = rc.seed;
  opt.workers = rc.workers;
  Table t{"smoothness", {"level", "hessian_norm_est", "lipschitz_est", "jacobian_norm_est"}, {}};
  for (const auto& r : smoothness_report(hierarchy, base, opt)) {
    t.add_row({std::int64_t{r.level}, r.hessian_norm_est, r.lipschitz_est, r.jacobian_norm_est});
  }
  std::vector<Table> tables{t};
  if (s.generated) tables.push_back(memories_table(s.memories));
  return tables;
}

std::vector<Table> run_knn_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  const Setup s = setup_memories(p, rc.seed);
  const MemorySet& mem = s.memories;
  const FlowConfig fcfg = flow_from(p);
  const auto nq = p.integer("n_queries");
  if (nq < 1) throw InputError("config key 'n_queries' must be positive");
  const auto taus = p.reals("taus");
  if (taus.empty()) throw InputError("config key 'taus' is empty");
  for (double tau : taus) {
    if (!(tau > 0.0)) throw InputError("config key 'taus' needs positive temperatures");
  }
  const double sigma = p.real("query_sigma") > 0.0 ? p.real("query_sigma") : 1.5 * mem.radius();
  const Vector centroid = mem.centroid();
  const auto n = static_cast<std::size_t>(nq);
  std::vector<Vector> queries(n);
  for (std::size_t q = 0; q < n; ++q) {
    queries[q] = centroid + sigma * standard_normal(mem.dim(), derive_seed(rc.seed, StreamKind::kQuery, q));
  }

  struct Row {
    double k_eq = 0.0;
    ClassId soft = 0;
    ClassId hard = 0;
    ClassId basin = 0;
  };
  Table t{"knn",
          {"query_id", "tau", "k_equivalent", "soft_argmax_class", "hard_1nn_class", "basin_class",
           "agreement_flag"},
          {}};
  for (double tau : taus) {
    const EnergyLandscape landscape(mem, 2.0 / tau);
    std::vector<Row> rows(n);
    parallel_for(n, rc.workers, [&](std::size_t q) {
      const FlowResult r = flow(landscape, queries[q], fcfg);
      if (!r.converged) {
        throw NumericalError("knn query " + std::to_string(q) + " did not converge", r.steps_taken);
      }
      const Vector w = landscape.weights(r.terminal);
      rows[q].k_eq = SoftWeights{std::vector<double>(w.data(), w.data() + w.size()), tau}.effective_count();
      rows[q].soft = mem.classes()[soft_knn_predict(mem, queries[q], tau).prediction.argmax()];
      rows[q].hard = mem.label(nearest_k(mem, queries[q], 1).front());
      rows[q].basin = mem.label(landscape.nearest_present(r.terminal));
    });
    for (std::size_t q = 0; q < n; ++q) {
      const Row& r = rows[q];
      t.add_row({static_cast<std::int64_t>(q), tau, r.k_eq, std::int64_t{r.soft},
                 std::int64_t{r.hard}, std::int64_t{r.basin},
                 std::int64_t{r.soft == r.basin ? 1 : 0}});
    }
  }
  std::vector<Table> tables{t};
  if (s.generated) tables.push_back(memories_table(s.memories));
  return tables;
}

std::vector<Table> run_grid_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  const auto side64 = p.integer("side");
  if (side64 < 2 || side64 > (1 << 16)) throw InputError("config key 'side' must lie in [2, 65536]");
  const int side = static_cast<int>(side64);
  const auto levels64 = p.integer("levels");
  if (levels64 < 0 || levels64 > 16) throw InputError("config key 'levels' must lie in [0, 16]");
  const int levels = static_cast<int>(levels64);
  const auto shares = p.reals("p_red");
  if (shares.empty()) throw InputError("config key 'p_red' is empty");
  for (double v : shares) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("config key 'p_red' needs values in [0, 1]");
  }
  const bool pbm = p.flag("pbm");
  Table t{"grid", {"p_red_init", "level", "red_share"}, {}};
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const std::uint64_t seed = derive_seed(rc.seed, StreamKind::kTrial, i);
    for (const auto& pt : amplification_curve(side, shares[i], levels, seed)) {
      t.add_row({shares[i], std::int64_t{pt.level}, pt.red_share});
    }
    if (pbm) {
      std::filesystem::create_directories(rc.out_dir);
      ClassGrid grid = init_grid(side, shares[i], seed);
      for (int level = 0; level <= levels; ++level) {
        if (level > 0) {
          grid = coarsen(grid, derive_seed(seed, StreamKind::kLevel, static_cast<std::uint64_t>(level)));
        }
        write_pbm(rc.out_dir / ("grid_p" + format_double(shares[i]) + "_level" +
                                std::to_string(level) + ".pbm"),
                  grid);
      }
    }
  }
  return {t};
}

std::vector<Table> run_odds_experiment(const RunConfig& rc) {
  const Params p(rc.params);
  auto ps = p.integers("p");
  auto qs = p.integers("q");
  auto ss = p.integers("S");
  const auto trials = p.integer("trials");
  if (trials < 1) throw InputError("config key 'trials' must be positive");
  const std::size_t n = std::max({ps.size(), qs.size(), ss.size()});
  auto broadcast = [n](std::vector<std::int64_t>& v, const char* key) {
    if (v.size() == 1) v.assign(n, v.front());
    if (v.size() != n) {
      throw InputError(std::string("config keys p, q, S need equal lengths (or length 1); '") +
                       key + "' does not match");
    }
  };
  if (n == 0) throw InputError("config keys p, q, S are empty");
  broadcast(ps, "p");
  broadcast(qs, "q");
  broadcast(ss, "S");
  Table t{"odds",
          {"p", "q", "S", "lambda_init", "lambda_smooth", "trials", "pure_A", "pure_B", "mixed",
           "empirical_conditional_odds"},
          {}};
  for (std::size_t i = 0; i < n; ++i) {
    const MergeScenario sc{ps[i], qs[i], ss[i]};
    sc.validate();
    const MergeCounts mc = simulate_merge(sc, trials, derive_seed(rc.seed, StreamKind::kLevel, i), rc.workers);
    t.add_row({sc.p, sc.q, sc.features, initial_odds(sc), smoothed_odds(sc), trials, mc.pure_a,
               mc.pure_b, mc.mixed, mc.conditional_odds()});
  }
  return {t};
}

double cell_number(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&c)) return *d;
  const std::string& s = std::get<std::string>(c);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("not a number: '" + s + "'");
  return x;
}

std::size_t column_of(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw InputError("table " + t.name + " has no column '" + name + "'");
  return static_cast<std::size_t>(it - t.columns.begin());
}

Table plot_table(const std::string& name) {
  return Table{name, {"series", "x", "y", "stderr"}, {}};
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Table census_plot(const Table& census) {
  Table out = plot_table("plot_census");
  const auto lv = column_of(census, "level");
  const auto amp = column_of(census, "amplification");
  const auto pgen = column_of(census, "p_gen");
  const auto div = column_of(census, "diversity");
  const auto priv = column_of(census, "privacy_k1");
  const auto nq = column_of(census, "n_queries");
  const auto fail = column_of(census, "failures");
  // The majority class row carries the largest p_data; amplification is the
  // same on every row of a level.
  const auto pdata = column_of(census, "p_data");
  std::map<double, std::pair<double, const std::vector<Cell>*>> best;
  std::vector<double> order;
  for (const auto& row : census.rows) {
    const double level = cell_number(row[lv]);
    const double pd = cell_number(row[pdata]);
    auto it = best.find(level);
    if (it == best.end()) {
      order.push_back(level);
      best[level] = {pd, &row};
    } else if (pd > it->second.first) {
      it->second = {pd, &row};
    }
  }
  for (const char* series : {"amplification", "diversity", "privacy_k1"}) {
    for (double level : order) {
      const auto& row = *best[level].second;
      const std::string s = series;
      double y = 0.0;
      double se = kNaN;
      if (s == "amplification") {
        y = cell_number(row[amp]);
        se = binomial_stderr(cell_number(row[pgen]), cell_number(row[nq]) - cell_number(row[fail]));
      } else if (s == "diversity") {
        y = cell_number(row[div]);
      } else {
        y = cell_number(row[priv]);
      }
      out.add_row({s, level, y, se});
    }
  }
  return out;
}

Table grid_plot(const Table& grid, std::optional<int> side) {
  Table out = plot_table("plot_grid");
  const auto pr = column_of(grid, "p_red_init");
  const auto lv = column_of(grid, "level");
  const auto share = column_of(grid, "red_share");
  for (const auto& row : grid.rows) {
    const double level = cell_number(row[lv]);
    const double y = cell_number(row[share]);
    double se = kNaN;
    if (side) {
      const double s = static_cast<double>(*side >> static_cast<int>(level));
      se = binomial_stderr(y, s * s);
    }
    out.add_row({"p_red=" + format_double(cell_number(row[pr])), level, y, se});
  }
  return out;
}

Table smoothness_plot(const Table& sm) {
  Table out = plot_table("plot_smoothness");
  const auto lv = column_of(sm, "level");
  for (const char* series : {"hessian_norm_est", "lipschitz_est", "jacobian_norm_est"}) {
    const auto col = column_of(sm, series);
    for (const auto& row : sm.rows) {
      out.add_row({std::string(series), cell_number(row[lv]), cell_number(row[col]), kNaN});
    }
  }
  return out;
}

std::vector<Table> plotdata_impl(const std::vector<Table>& tables, std::optional<int> grid_side) {
  std::vector<Table> out;
  for (const auto& t : tables) {
    if (t.name == "census") out.push_back(census_plot(t));
    if (t.name == "grid") out.push_back(grid_plot(t, grid_side));
    if (t.name == "smoothness") out.push_back(smoothness_plot(t));
  }
  return out;
}

std::string format_name(TableFormat f) { return f == TableFormat::kCsv ? "csv" : "json"; }

}  // namespace

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kCensus: return "census";
    case Experiment::kSmoothness: return "smoothness";
    case Experiment::kGrid: return "grid";
    case Experiment::kKnn: return "knn";
    case Experiment::kOdds: return "odds";
    case Experiment::kBiasvar: return "biasvar";
    case Experiment::kPrivacy: return "privacy";
  }
  return "";
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = {Experiment::kCensus, Experiment::kSmoothness,
                                              Experiment::kGrid,   Experiment::kKnn,
                                              Experiment::kOdds,   Experiment::kBiasvar,
                                              Experiment::kPrivacy};
  return all;
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (auto e : all_experiments()) {
    if (experiment_name(e) == name) return e;
  }
  return std::nullopt;
}

const std::vector<ParamSpec>& experiment_schema(Experiment e) {
  static const std::map<Experiment, Schema> schemas = [] {
    std::map<Experiment, Schema> m;
    for (auto x : all_experiments()) m[x] = make_schema(x);
    return m;
  }();
  return schemas.at(e);
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw InputError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> env;
  if (const char* v = std::getenv("LANDSCAPE_LAB_SEED")) env["seed"] = v;
  if (const char* v = std::getenv("LANDSCAPE_LAB_OUT_DIR")) env["out_dir"] = v;
  return env;
}

RunConfig resolve_config(Experiment experiment, const ConfigLayers& layers) {
  RunConfig rc;
  rc.experiment = experiment;
  const auto& schema = experiment_schema(experiment);
  for (const auto& spec : schema) rc.params[spec.key] = spec.default_value;

  std::map<std::string, std::string> globals;
  for (const auto* layer : {&layers.file, &layers.env, &layers.flags}) {
    for (const auto& [key, value] : *layer) {
      if (kGlobalKeys.count(key)) {
        globals[key] = value;
      } else if (rc.params.count(key)) {
        rc.params[key] = value;
      } else {
        throw InputError("unknown config key '" + key + "' for experiment " +
                         std::string(experiment_name(experiment)));
      }
    }
  }
  if (auto it = globals.find("experiment"); it != globals.end()) {
    if (it->second != experiment_name(experiment)) {
      throw InputError("config names experiment '" + it->second + "' but '" +
                       std::string(experiment_name(experiment)) + "' was requested");
    }
  }
  if (auto it = globals.find("seed"); it != globals.end()) {
    const std::string& v = it->second;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), rc.seed);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw InputError("seed must be a non-negative integer, got '" + v + "'");
    }
  }
  if (auto it = globals.find("out_dir"); it != globals.end()) {
    if (it->second.empty()) throw InputError("out_dir must not be empty");
    rc.out_dir = it->second;
  }
  if (auto it = globals.find("format"); it != globals.end()) {
    if (it->second == "csv") {
      rc.format = TableFormat::kCsv;
    } else if (it->second == "json") {
      rc.format = TableFormat::kJson;
    } else {
      throw InputError("format must be csv or json, got '" + it->second + "'");
    }
  }
  if (auto it = globals.find("workers"); it != globals.end()) {
    const std::string& v = it->second;
    int w = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), w);
    if (ec != std::errc() || p != v.data() + v.size() || w < 1 || w > 1024) {
      throw InputError("workers must be an integer in [1, 1024], got '" + v + "'");
    }
    rc.workers = w;
  }
  return rc;
}

std::vector<Table> compute_tables(const RunConfig& config) {
  switch (config.experiment) {
    case Experiment::kCensus: return run_census_experiment(config);
    case Experiment::kSmoothness: return run_smoothness_experiment(config);
    case Experiment::kGrid: return run_grid_experiment(config);
    case Experiment::kKnn: return run_knn_experiment(config);
    case Experiment::kOdds: return run_odds_experiment(config);
    case Experiment::kBiasvar: return run_biasvar_experiment(config);
    case Experiment::kPrivacy: return run_privacy_experiment(config);
  }
  throw InputError("unknown experiment");
}

std::vector<Table> plotdata_from(const std::vector<Table>& tables) {
  return plotdata_impl(tables, std::nullopt);
}

RunResult run(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec || !std::filesystem::is_directory(config.out_dir)) {
    throw InputError("cannot create output directory " + config.out_dir.string());
  }
  RunResult result;
  result.tables = compute_tables(config);

  std::optional<int> side;
  if (config.experiment == Experiment::kGrid) side = static_cast<int>(Params(config.params).integer("side"));
  std::vector<Table> all = result.tables;
  for (auto& t : plotdata_impl(result.tables, side)) all.push_back(std::move(t));
  for (const auto& t : all) result.files.push_back(write_table(t, config.out_dir, config.format));
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::ordered_json manifest;
  manifest["artifact"] = "landscape_lab";
  manifest["version"] = LANDSCAPE_LAB_VERSION;
  manifest["experiment"] = std::string(experiment_name(config.experiment));
  nlohmann::ordered_json resolved;
  resolved["seed"] = config.seed;
  resolved["out_dir"] = config.out_dir.string();
  resolved["format"] = format_name(config.format);
  resolved["workers"] = config.workers;
  for (const auto& spec : experiment_schema(config.experiment)) {
    resolved[spec.key] = config.params.at(spec.key);
  }
  manifest["config"] = resolved;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& f : result.files) files.push_back(f.filename().string());
  manifest["tables"] = files;
  manifest["wall_time_seconds"] = result.wall_seconds;
  const auto path = config.out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  result.files.push_back(path);
  return result;
}

std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& dir,
                                                 const std::vector<std::string>& table_names,
                                                 TableFormat format) {
  if (table_names.empty()) throw InputError("emit_plotdata needs at least one table");
  std::vector<Table> tables;
  for (const auto& name : table_names) {
    const auto path = dir / (name + ".csv");
    if (!std::filesystem::exists(path)) throw InputError("missing table " + path.string());
    const CsvData csv = read_csv(path);
    Table t{name, csv.header, {}};
    for (const auto& row : csv.rows) {
      std::vector<Cell> cells;
      for (const auto& v : row) cells.emplace_back(v);
      t.add_row(std::move(cells));
    }
    tables.push_back(std::move(t));
  }
  std::optional<int> side;
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    const auto m = nlohmann::json::parse(in, nullptr, false);
    if (!m.is_discarded() && m.contains("config") && m["config"].contains("side")) {
      const std::string v = m["config"]["side"].get<std::string>();
      int s = 0;
      const auto [p, err] = std::from_chars(v.data(), v.data() + v.size(), s);
      if (err == std::errc() && p == v.data() + v.size()) side = s;
    }
  }
  std::vector<std::filesystem::path> files;
  for (const auto& t : plotdata_impl(tables, side)) files.push_back(write_table(t, dir, format));
  return files;
}

}  // namespace landscape_lab
