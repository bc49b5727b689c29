#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/experiment.hpp"

namespace ll = landscape_lab;
namespace fs = std::filesystem;
using ll::Experiment;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("LANDSCAPE_LAB_TEST_TMP");
  const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "landscape_lab_tests";
  const fs::path dir = base / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ll::RunConfig config(Experiment e, std::map<std::string, std::string> flags) {
  return ll::resolve_config(e, ll::ConfigLayers{{}, {}, std::move(flags)});
}

// Small but complete settings for every experiment.
std::map<std::string, std::string> small(Experiment e) {
  switch (e) {
    case Experiment::kCensus: return {{"n_queries", "150"}, {"trajectories", "2"}};
    case Experiment::kSmoothness: return {{"probes", "24"}};
    case Experiment::kGrid: return {{"side", "64"}};
    case Experiment::kKnn: return {{"n_queries", "20"}};
    case Experiment::kOdds: return {{"trials", "5000"}};
    case Experiment::kBiasvar: return {{"bootstrap_rounds", "10"}, {"probes_per_memory", "1"}};
    case Experiment::kPrivacy: return {{"replicates", "2"}, {"n_queries", "100"}};
  }
  return {};
}

}  // namespace

TEST_CASE("experiment names round trip") {
  CHECK(ll::all_experiments().size() == 7);
  for (auto e : ll::all_experiments()) CHECK(ll::parse_experiment(ll::experiment_name(e)) == e);
  CHECK(!ll::parse_experiment("censuss").has_value());
}

TEST_CASE("config text parsing") {
  const auto kv = ll::parse_config_text("# comment\nseed = 4\n\n  n_queries=10   # trailing\nlevels = 0, 2\n");
  CHECK(kv.at("seed") == "4");
  CHECK(kv.at("n_queries") == "10");
  CHECK(kv.at("levels") == "0, 2");
  CHECK_THROWS_AS(ll::parse_config_text("seed = 1\nseed = 2\n"), ll::InputError);
  CHECK_THROWS_AS(ll::parse_config_text("just words\n"), ll::InputError);
  CHECK_THROWS_AS(ll::parse_config_file("/nonexistent/landscape.cfg"), ll::InputError);
}

TEST_CASE("unknown keys are rejected by name") {
  try {
    config(Experiment::kGrid, {{"sidee", "64"}});
    FAIL("expected InputError");
  } catch (const ll::InputError& e) {
    CHECK(std::string(e.what()).find("sidee") != std::string::npos);
  }
  // a census key is not a grid key
  CHECK_THROWS_AS(config(Experiment::kGrid, {{"n_queries", "5"}}), ll::InputError);
  CHECK_THROWS_AS(config(Experiment::kGrid, {{"experiment", "odds"}}), ll::InputError);
  CHECK_NOTHROW(config(Experiment::kGrid, {{"experiment", "grid"}}));
}

TEST_CASE("resolved config carries every schema key") {
  const auto rc = config(Experiment::kOdds, {});
  for (const auto& spec : ll::experiment_schema(Experiment::kOdds)) {
    REQUIRE(rc.params.count(spec.key) == 1);
    CHECK(rc.params.at(spec.key) == spec.default_value);
  }
  CHECK(rc.seed == 0);
  CHECK(rc.workers == 1);
  CHECK(rc.format == ll::TableFormat::kCsv);
}

TEST_CASE("layer precedence: defaults < file < env < flags") {
  ll::ConfigLayers layers;
  layers.file = {{"seed", "1"}, {"side", "32"}, {"out_dir", "a"}};
  layers.env = {{"seed", "2"}, {"out_dir", "b"}};
  auto rc = ll::resolve_config(Experiment::kGrid, layers);
  CHECK(rc.seed == 2);
  CHECK(rc.out_dir == fs::path("b"));
  CHECK(rc.params.at("side") == "32");
  layers.flags = {{"seed", "3"}, {"format", "json"}, {"workers", "4"}};
  rc = ll::resolve_config(Experiment::kGrid, layers);
  CHECK(rc.seed == 3);
  CHECK(rc.out_dir == fs::path("b"));
  CHECK(rc.format == ll::TableFormat::kJson);
  CHECK(rc.workers == 4);
  CHECK_THROWS_AS(config(Experiment::kGrid, {{"format", "xml"}}), ll::InputError);
  CHECK_THROWS_AS(config(Experiment::kGrid, {{"workers", "0"}}), ll::InputError);
  CHECK_THROWS_AS(config(Experiment::kGrid, {{"seed", "x1"}}), ll::InputError);
}

TEST_CASE("bad parameter values are input errors") {
  CHECK_THROWS_AS(ll::compute_tables(config(Experiment::kGrid, {{"side", "48"}})), ll::InputError);
  CHECK_THROWS_AS(ll::compute_tables(config(Experiment::kOdds, {{"p", "2,x"}})), ll::InputError);
  CHECK_THROWS_AS(ll::compute_tables(config(Experiment::kCensus, {{"beta", "-1"}})), ll::InputError);
  CHECK_THROWS_AS(ll::compute_tables(config(Experiment::kOdds, {{"p", "1,2"}, {"q", "1,2,3"}})), ll::InputError);
}

TEST_CASE("grid with p_red = 0.5 stays balanced") {
  const auto tables = ll::compute_tables(config(Experiment::kGrid, {{"p_red", "0.5"}, {"side", "512"}, {"levels", "3"}}));
  const auto& grid = tables.at(0);
  REQUIRE(grid.name == "grid");
  REQUIRE(grid.rows.size() == 4);
  const double first = std::get<double>(grid.rows.front()[2]);
  const double last = std::get<double>(grid.rows.back()[2]);
  // stderr at the coarsest level dominates
  CHECK(std::abs(first - last) < 3 * std::sqrt(0.25 / (64.0 * 64.0)));
}

TEST_CASE("odds 9,1,3 gives 729") {
  const auto tables = ll::compute_tables(config(Experiment::kOdds, {{"p", "9"}, {"q", "1"}, {"S", "3"}, {"trials", "1000"}}));
  const auto& odds = tables.at(0);
  REQUIRE(odds.rows.size() == 1);
  std::size_t col = 0;
  while (odds.columns[col] != "lambda_smooth") ++col;
  CHECK(std::get<double>(odds.rows[0][col]) == 729.0);
}

TEST_CASE("tables are byte-identical across repeats and worker counts") {
  for (auto e : ll::all_experiments()) {
    auto flags = small(e);
    flags["seed"] = "5";
    auto one = config(e, flags);
    flags["workers"] = "8";
    auto eight = config(e, flags);
    const auto a = ll::compute_tables(one);
    const auto b = ll::compute_tables(one);
    const auto c = ll::compute_tables(eight);
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].to_csv() == b[i].to_csv());
      CHECK(a[i].to_csv() == c[i].to_csv());
    }
  }
}

TEST_CASE("run writes tables, plot data and a manifest") {
  const auto dir = scratch("run_census");
  auto flags = small(Experiment::kCensus);
  flags["out_dir"] = dir.string();
  flags["seed"] = "11";
  const auto result = ll::run(config(Experiment::kCensus, flags));
  for (const char* f : {"census.csv", "minima.csv", "trajectory.csv", "memories.csv", "plot_census.csv", "manifest.json"})
    CHECK(fs::exists(dir / f));
  const auto header = slurp(dir / "census.csv").substr(0, slurp(dir / "census.csv").find('\n'));
  CHECK(header == "level,class,p_data,p_gen,amplification,diversity,privacy_k1,privacy_k2,privacy_k5,privacy_k10,n_queries,failures");
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("experiment") == "census");
  CHECK(manifest.at("config").at("seed") == 11);
  CHECK(manifest.at("config").at("n_queries") == "150");
  CHECK(manifest.contains("version"));
  CHECK(manifest.at("wall_time_seconds").get<double>() >= 0.0);
  CHECK(!result.files.empty());
  CHECK(slurp(dir / "census.csv").find('\r') == std::string::npos);
}

TEST_CASE("json format") {
  const auto dir = scratch("run_odds_json");
  auto flags = small(Experiment::kOdds);
  flags["out_dir"] = dir.string();
  flags["format"] = "json";
  ll::run(config(Experiment::kOdds, flags));
  REQUIRE(fs::exists(dir / "odds.json"));
  const auto rows = nlohmann::json::parse(slurp(dir / "odds.json"));
  REQUIRE(rows.is_array());
  CHECK(rows.size() == 3);
  CHECK(rows[0].at("p") == 2);
  CHECK(rows[0].contains("empirical_conditional_odds"));
}

TEST_CASE("plot data") {
  const auto dir = scratch("plot");
  auto flags = small(Experiment::kGrid);
  flags["out_dir"] = dir.string();
  ll::run(config(Experiment::kGrid, flags));
  fs::remove(dir / "plot_grid.csv");
  const auto files = ll::emit_plotdata(dir, {"grid"});
  REQUIRE(files.size() == 1);
  const auto text = slurp(dir / "plot_grid.csv");
  CHECK(text.rfind("series,x,y,stderr\n", 0) == 0);
  CHECK_THROWS_AS(ll::emit_plotdata(dir, {"census"}), ll::InputError);
}

TEST_CASE("smoothness plot data has both series") {
  const auto tables = ll::compute_tables(config(Experiment::kSmoothness, small(Experiment::kSmoothness)));
  const auto plots = ll::plotdata_from(tables);
  REQUIRE(plots.size() == 1);
  const auto csv = plots[0].to_csv();
  CHECK(csv.find("hessian_norm") != std::string::npos);
  CHECK(csv.find("lipschitz") != std::string::npos);
}

TEST_CASE("census failures surface as numerical errors") {
  auto flags = small(Experiment::kCensus);
  flags["query_sigma"] = "1e300";
  flags["out_dir"] = scratch("numerical").string();
  CHECK_THROWS_AS(ll::run(config(Experiment::kCensus, flags)), ll::NumericalError);
}
