#pragma once

// Command-line pipeline: configuration, stage commands and exit codes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "catrec/baselines.hpp"
#include "catrec/hetgraph.hpp"
#include "catrec/ingest.hpp"
#include "catrec/skipgram.hpp"
#include "catrec/synth.hpp"
#include "catrec/vimodel.hpp"

namespace catrec::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kMissingArtifact = 3,
  kDivergence = 4,
};

struct IngestSettings {
  ingest::ColumnSpec columns;
  Timestamp split_time = 0;   // 0: derive from test_days
  std::size_t test_days = 30;  // last whole UTC days of the log held out
  ingest::UserFilter filter;
};

struct EvalSettings {
  std::vector<std::size_t> ks = {5, 10, 15, 20};
  std::size_t recommend_k = 10;
  bool exclude_purchased = false;
  std::vector<std::string> models = {"vi", "pop", "mf", "bpr", "m2v"};
};

struct RunConfig {
  std::string input;
  std::string workdir = "work";
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  IngestSettings ingest;
  double half_life_days = 30.0;
  std::string schema = "U-B-C-B-U";
  hetgraph::WalkParams walk;
  skipgram::SgnsConfig skipgram;
  vi::Hyperparameters vi;
  baselines::AlsConfig mf;
  baselines::BprConfig bpr;
  EvalSettings eval;
  synth::SynthConfig synth;

  // Copies `seed` into every module that draws random numbers.
  void propagate_seed();
  // Throws ConfigError.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys throw ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
// Every field, so the output reloads to an identical RunConfig.
std::string dump_config(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

// Workdir layout.
namespace paths {
std::filesystem::path ingest(const RunConfig& c);
std::filesystem::path matrices(const RunConfig& c);
std::filesystem::path walk(const RunConfig& c);
std::filesystem::path skipgram(const RunConfig& c);
std::filesystem::path vi(const RunConfig& c);
std::filesystem::path baseline(const RunConfig& c, baselines::Variant v);
std::filesystem::path recommend(const RunConfig& c);
std::filesystem::path evaluate(const RunConfig& c);
std::filesystem::path project(const RunConfig& c);
}  // namespace paths

// Parses argv, runs one subcommand, maps exceptions to exit codes. Messages
// go to `out`/`err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace catrec::cli
