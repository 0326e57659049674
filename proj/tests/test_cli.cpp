#include <filesystem>
#include <sstream>

#include "catrec/cli.hpp"
#include "catrec/textio.hpp"
#include "doctest.h"

using namespace catrec;
using namespace catrec::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "catrec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const char* kSmallConfig = R"({
  "walk": {"walks_per_node": 2},
  "skipgram": {"dim": 8, "epochs": 1},
  "vi": {"dim": 8, "epochs": 2, "mc_samples": 4},
  "mf": {"factors": 4, "iterations": 2},
  "bpr": {"factors": 4, "epochs": 2},
  "eval": {"ks": [5, 10]}
})";

}  // namespace

TEST_CASE("config round trip") {
  auto c = parse_config(R"({"seed": 9, "threads": 3, "vi": {"optimizer": "adam", "learning_rate": 0.002},
                            "eval": {"ks": [1, 3]}, "ingest": {"delimiter": ";"}})");
  CHECK(c.seed == 9);
  CHECK(c.threads == 3);
  CHECK(c.vi.learning_rate == 0.002);
  CHECK(c.eval.ks == std::vector<std::size_t>{1, 3});
  CHECK(c.ingest.columns.delimiter == ';');
  CHECK(parse_config(dump_config(c)) == c);
  CHECK(parse_config("{}") == RunConfig{});
  CHECK(parse_config(dump_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(R"({"sede": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"vi": {"dimension": 4}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": "one"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), MissingArtifact);
  auto c = parse_config(R"({"threads": 0})");
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("catrec_cli_codes");
  textio::write_file(dir / "bad.json", R"({"unknown": true})");
  CHECK(run({"--config", (dir / "bad.json").string(), "ingest"}).code == kConfigError);
  CHECK(run({"--config", (dir / "missing.json").string(), "ingest"}).code == kMissingArtifact);
  CHECK(run({"--workdir", (dir / "w").string(), "evaluate"}).code == kMissingArtifact);
  CHECK(run({"--workdir", (dir / "w").string(), "baseline", "svd"}).code == kConfigError);
  CHECK(run({"--threads", "0", "synth", "--out", (dir / "x.csv").string()}).code == kConfigError);
  CHECK(run({"ingest"}).code == kConfigError);
  CHECK(run({"no-such-command"}).code == kConfigError);
  CHECK(run({"--help"}).code == kOk);
}

TEST_CASE("small pipeline end to end") {
  const auto dir = fresh_dir("catrec_cli_pipeline");
  const auto csv = (dir / "log.csv").string();
  const auto cfg = (dir / "config.json").string();
  const auto work = (dir / "work").string();
  textio::write_file(cfg, kSmallConfig);

  auto ok = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", cfg, "--workdir", work});
    const auto r = run(args);
    INFO(args.back() << ": " << r.err);
    CHECK(r.code == kOk);
    return r;
  };
  ok({"synth", "--out", csv, "--users", "40", "--categories", "12", "--blocks", "3"});
  CHECK(fs::exists(csv));
  ok({"ingest", "--input", csv});
  CHECK(fs::exists(fs::path(work) / "ingest" / "train.csv"));
  CHECK(fs::exists(fs::path(work) / "ingest" / "config.json"));

  // Later stages need their inputs.
  CHECK(run({"--config", cfg, "--workdir", work, "skipgram"}).code == kMissingArtifact);

  ok({"matrices"});
  ok({"walk"});
  ok({"skipgram"});
  ok({"train-vi"});
  for (const char* v : {"pop", "mf", "bpr", "m2v"}) ok({"baseline", v});

  const auto one = ok({"recommend", "--user", "u0", "--k", "3"});
  CHECK(one.out.rfind("u0\tcat", 0) == 0);
  CHECK(std::count(one.out.begin(), one.out.end(), '\t') == 3);
  CHECK(run({"--config", cfg, "--workdir", work, "recommend", "--user", "nobody"}).code == kConfigError);
  ok({"recommend", "--model", "bpr"});
  CHECK(textio::read_lines(fs::path(work) / "recommend" / "bpr.tsv").size() > 10);

  const auto report = ok({"evaluate"});
  CHECK(report.out.rfind("metric\tVI\tPop\tMF\tBPR\tM2V\nNDCG@5\t", 0) == 0);
  CHECK(fs::exists(fs::path(work) / "eval" / "report.tsv"));

  ok({"project2d"});
  const auto proj = textio::read_lines(fs::path(work) / "project" / "projection.csv");
  CHECK(proj.front() == "node,x,y,label");
  CHECK(proj.size() == 13);

  // The recorded configuration reloads to the one that ran.
  auto c = load_config(cfg);
  c.workdir = work;
  CHECK(load_config(fs::path(work) / "eval" / "config.json") == c);
  c.input = csv;
  CHECK(load_config(fs::path(work) / "ingest" / "config.json") == c);
}
