#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "landscape_lab/table.hpp"

namespace landscape_lab {

enum class Experiment { kCensus, kSmoothness, kGrid, kKnn, kOdds, kBiasvar, kPrivacy };

std::string_view experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);
const std::vector<Experiment>& all_experiments();

struct ParamSpec {
  std::string key;
  std::string default_value;
  std::string help;
};

// Experiment-specific keys with their defaults. Lists are comma separated.
const std::vector<ParamSpec>& experiment_schema(Experiment e);

// key = value lines; '#' starts a comment. Duplicate keys are an input error.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

struct RunConfig {
  Experiment experiment = Experiment::kCensus;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  TableFormat format = TableFormat::kCsv;
  int workers = 1;
  // Every schema key of the experiment, defaults filled in.
  std::map<std::string, std::string> params;
};

// Sources in increasing priority; each may set the global keys seed, out_dir,
// format, workers (and experiment, which must agree) plus schema keys. A key
// outside the schema is an input error that names it.
struct ConfigLayers {
  std::map<std::string, std::string> file;
  std::map<std::string, std::string> env;
  std::map<std::string, std::string> flags;
};
RunConfig resolve_config(Experiment experiment, const ConfigLayers& layers);

// LANDSCAPE_LAB_SEED and LANDSCAPE_LAB_OUT_DIR, when set.
std::map<std::string, std::string> environment_overrides();

struct RunResult {
  std::vector<Table> tables;
  std::vector<std::filesystem::path> files;
  double wall_seconds = 0.0;
};

// Runs the experiment, writes its tables, plot data and manifest.json into
// out_dir. Throws InputError for bad parameters and NumericalError when the
// numerics fail (including a census level with more than 1% failed flows).
RunResult run(const RunConfig& config);

// Only computes the result tables; nothing is written.
std::vector<Table> compute_tables(const RunConfig& config);

// Long-format (series, x, y, stderr) tables reshaped from census, grid and
// smoothness tables. Other tables are ignored.
std::vector<Table> plotdata_from(const std::vector<Table>& tables);

// Reads <dir>/<name>.csv for every name and writes the plot-data tables next
// to them. A missing table is an input error.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& dir,
                                                 const std::vector<std::string>& table_names,
                                                 TableFormat format = TableFormat::kCsv);

}  // namespace landscape_lab
