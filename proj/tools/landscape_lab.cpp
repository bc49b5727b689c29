// landscape_lab: run one experiment and write its tables.
//
//   landscape_lab census --config run.cfg --seed 7 --out-dir out --workers 8
//   landscape_lab odds --set p=9 --set q=1 --set S=3
//
// Exit status: 0 ok, 2 bad input or config, 3 numerical failure.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/experiment.hpp"

namespace ll = landscape_lab;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::string config;
  std::string seed;
  std::string out_dir;
  std::string format;
  std::string workers;
  std::vector<std::string> sets;
  bool list_keys = false;
};

void print_keys(ll::Experiment e) {
  std::cout << "keys for " << ll::experiment_name(e) << " (key = default  # meaning):\n";
  for (const auto& spec : ll::experiment_schema(e)) {
    std::cout << "  " << spec.key << " = " << spec.default_value << "  # " << spec.help << '\n';
  }
}

int run_experiment(ll::Experiment e, const Globals& g) {
  ll::ConfigLayers layers;
  if (!g.config.empty()) layers.file = ll::parse_config_file(g.config);
  layers.env = ll::environment_overrides();
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ll::InputError("--set expects key=value, got '" + s + "'");
    layers.flags[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (!g.seed.empty()) layers.flags["seed"] = g.seed;
  if (!g.out_dir.empty()) layers.flags["out_dir"] = g.out_dir;
  if (!g.format.empty()) layers.flags["format"] = g.format;
  if (!g.workers.empty()) layers.flags["workers"] = g.workers;

  const ll::RunConfig config = ll::resolve_config(e, layers);
  const ll::RunResult result = ll::run(config);
  for (const auto& f : result.files) std::cout << f.string() << '\n';
  std::cerr << ll::experiment_name(e) << " finished in " << result.wall_seconds << " s\n";
  return 0;
}

const char* describe(ll::Experiment e) {
  switch (e) {
    case ll::Experiment::kCensus: return "basin census per abstraction level";
    case ll::Experiment::kSmoothness: return "Hessian, Lipschitz and Jacobian estimates per level";
    case ll::Experiment::kGrid: return "2x2 majority coarsening of two-class grids";
    case ll::Experiment::kKnn: return "soft kNN against basin attendance";
    case ll::Experiment::kOdds: return "merge odds (p/q)^S, exact and simulated";
    case ll::Experiment::kBiasvar: return "bootstrap bias and variance of basin classes";
    case ll::Experiment::kPrivacy: return "nearest-memory distance over replicate landscapes";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-landscape experiments: basin census, smoothness, grid coarsening, k-NN, odds"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "flat key = value config file");
  app.add_option("--seed", g.seed, "base seed (overrides LANDSCAPE_LAB_SEED)");
  app.add_option("--out-dir", g.out_dir, "output directory (overrides LANDSCAPE_LAB_OUT_DIR)");
  app.add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", g.workers, "worker threads; results do not depend on it");
  app.add_option("--set", g.sets, "key=value parameter override (repeatable)");
  app.add_flag("--list-keys", g.list_keys, "print the experiment's config keys and exit");

  std::map<CLI::App*, ll::Experiment> subs;
  for (auto e : ll::all_experiments()) {
    auto* sub = app.add_subcommand(std::string(ll::experiment_name(e)), describe(e));
    sub->fallthrough();
    subs[sub] = e;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitInput;
  }

  ll::Experiment chosen = ll::Experiment::kCensus;
  for (const auto& [sub, e] : subs) {
    if (sub->parsed()) chosen = e;
  }
  if (g.list_keys) {
    print_keys(chosen);
    return 0;
  }
  try {
    return run_experiment(chosen, g);
  } catch (const ll::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ll::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
}
