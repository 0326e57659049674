#include <fstream>
#include <set>
#include <sstream>

#include "catrec/cli.hpp"
#include "json.hpp"

namespace catrec::cli {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key " + path_ + key + ": " + e.what());
    }
  }

  void get_char(const char* key, char& out) {
    std::string s(1, out);
    get(key, s);
    if (s.size() != 1) throw ConfigError("config key " + path_ + key + " must be a single character");
    out = s[0];
  }

  ObjectReader child(const char* key) {
    used_.insert(key);
    return ObjectReader(j_.at(key), path_ + key + ".");
  }
  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown config key: " + path_ + item.key());
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "config section " + path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename F>
void section(ObjectReader& parent, const char* key, F&& body) {
  if (!parent.has(key)) return;
  auto r = parent.child(key);
  body(r);
  r.finish();
}

}  // namespace

void RunConfig::propagate_seed() {
  skipgram.seed = seed;
  vi.seed = seed;
  mf.seed = seed;
  bpr.seed = seed;
  synth.seed = seed;
}

void RunConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (workdir.empty()) throw ConfigError("workdir must not be empty");
  if (ingest.filter.min_tx > ingest.filter.max_tx) throw ConfigError("ingest.min_tx exceeds ingest.max_tx");
  if (ingest.split_time < 0) throw ConfigError("ingest.split_time must be >= 0");
  if (ingest.split_time == 0 && ingest.test_days < 1) throw ConfigError("ingest.test_days must be >= 1");
  if (!(half_life_days > 0.0)) throw ConfigError("half_life_days must be positive");
  hetgraph::MetapathSchema::parse(schema);
  if (walk.walks_per_node < 1) throw ConfigError("walk.walks_per_node must be >= 1");
  if (!(walk.epsilon0 >= 0.0 && walk.epsilon0 <= 1.0)) throw ConfigError("walk.epsilon0 must lie in [0, 1]");
  if (!(walk.gamma > 0.0 && walk.gamma <= 1.0)) throw ConfigError("walk.gamma must lie in (0, 1]");
  if (walk.length < hetgraph::MetapathSchema::parse(schema).size()) {
    throw ConfigError("walk.length must be at least the schema length");
  }
  skipgram.validate();
  vi.validate();
  mf.validate();
  bpr.validate();
  if (eval.ks.empty()) throw ConfigError("eval.ks must not be empty");
  for (auto k : eval.ks) {
    if (k < 1) throw ConfigError("eval.ks entries must be >= 1");
  }
  if (eval.recommend_k < 1) throw ConfigError("eval.recommend_k must be >= 1");
  for (const auto& m : eval.models) {
    if (m != "vi" && !baselines::parse_variant(m)) throw ConfigError("unknown model in eval.models: " + m);
  }
  synth.validate();
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  ObjectReader r(j, "");
  r.get("input", c.input);
  r.get("workdir", c.workdir);
  r.get("seed", c.seed);
  r.get("threads", c.threads);
  r.get("half_life_days", c.half_life_days);
  r.get("schema", c.schema);
  section(r, "ingest", [&](ObjectReader& s) {
    s.get("user_column", c.ingest.columns.user_column);
    s.get("basket_column", c.ingest.columns.basket_column);
    s.get("category_column", c.ingest.columns.category_column);
    s.get("time_column", c.ingest.columns.time_column);
    s.get_char("delimiter", c.ingest.columns.delimiter);
    s.get("split_time", c.ingest.split_time);
    s.get("test_days", c.ingest.test_days);
    s.get("min_tx", c.ingest.filter.min_tx);
    s.get("max_tx", c.ingest.filter.max_tx);
  });
  section(r, "walk", [&](ObjectReader& s) {
    s.get("walks_per_node", c.walk.walks_per_node);
    s.get("length", c.walk.length);
    s.get("epsilon0", c.walk.epsilon0);
    s.get("gamma", c.walk.gamma);
  });
  section(r, "skipgram", [&](ObjectReader& s) {
    s.get("dim", c.skipgram.dim);
    s.get("window", c.skipgram.window);
    s.get("negatives", c.skipgram.negatives);
    s.get("epochs", c.skipgram.epochs);
    s.get("lr_start", c.skipgram.lr_start);
    s.get("lr_end", c.skipgram.lr_end);
    s.get("unigram_power", c.skipgram.unigram_power);
  });
  section(r, "vi", [&](ObjectReader& s) {
    s.get("dim", c.vi.dim);
    s.get("alpha_bu", c.vi.alpha_bu);
    s.get("alpha_bv", c.vi.alpha_bv);
    s.get("alpha_kappa_t", c.vi.alpha_kappa_t);
    s.get("alpha_psi_t", c.vi.alpha_psi_t);
    s.get("alpha_kappa_a", c.vi.alpha_kappa_a);
    s.get("alpha_psi_a", c.vi.alpha_psi_a);
    s.get("alpha_A", c.vi.alpha_A);
    s.get("negatives_ratio", c.vi.negatives_ratio);
    s.get("batch_size", c.vi.batch_size);
    s.get("epochs", c.vi.epochs);
    s.get("learning_rate", c.vi.learning_rate);
    std::string optimizer = vi::optimizer_name(c.vi.optimizer);
    s.get("optimizer", optimizer);
    c.vi.optimizer = vi::parse_optimizer(optimizer);
    s.get("mc_samples", c.vi.mc_samples);
    s.get("predict_weight", c.vi.predict_weight);
  });
  section(r, "mf", [&](ObjectReader& s) {
    s.get("factors", c.mf.factors);
    s.get("regularization", c.mf.regularization);
    s.get("confidence_alpha", c.mf.confidence_alpha);
    s.get("iterations", c.mf.iterations);
  });
  section(r, "bpr", [&](ObjectReader& s) {
    s.get("factors", c.bpr.factors);
    s.get("learning_rate", c.bpr.learning_rate);
    s.get("regularization", c.bpr.regularization);
    s.get("epochs", c.bpr.epochs);
  });
  section(r, "eval", [&](ObjectReader& s) {
    s.get("ks", c.eval.ks);
    s.get("recommend_k", c.eval.recommend_k);
    s.get("exclude_purchased", c.eval.exclude_purchased);
    s.get("models", c.eval.models);
  });
  section(r, "synth", [&](ObjectReader& s) {
    s.get("users", c.synth.users);
    s.get("categories", c.synth.categories);
    s.get("blocks", c.synth.blocks);
    s.get("noise", c.synth.noise);
    s.get("train_days", c.synth.train_days);
    s.get("test_days", c.synth.test_days);
    s.get("start_time", c.synth.start_time);
  });
  r.finish();
  c.propagate_seed();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingArtifact(path.string());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  json j;
  j["input"] = c.input;
  j["workdir"] = c.workdir;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["half_life_days"] = c.half_life_days;
  j["schema"] = c.schema;
  j["ingest"] = {{"user_column", c.ingest.columns.user_column},
                 {"basket_column", c.ingest.columns.basket_column},
                 {"category_column", c.ingest.columns.category_column},
                 {"time_column", c.ingest.columns.time_column},
                 {"delimiter", std::string(1, c.ingest.columns.delimiter)},
                 {"split_time", c.ingest.split_time},
                 {"test_days", c.ingest.test_days},
                 {"min_tx", c.ingest.filter.min_tx},
                 {"max_tx", c.ingest.filter.max_tx}};
  j["walk"] = {{"walks_per_node", c.walk.walks_per_node},
               {"length", c.walk.length},
               {"epsilon0", c.walk.epsilon0},
               {"gamma", c.walk.gamma}};
  j["skipgram"] = {{"dim", c.skipgram.dim},           {"window", c.skipgram.window},
                   {"negatives", c.skipgram.negatives}, {"epochs", c.skipgram.epochs},
                   {"lr_start", c.skipgram.lr_start},   {"lr_end", c.skipgram.lr_end},
                   {"unigram_power", c.skipgram.unigram_power}};
  j["vi"] = {{"dim", c.vi.dim},
             {"alpha_bu", c.vi.alpha_bu},
             {"alpha_bv", c.vi.alpha_bv},
             {"alpha_kappa_t", c.vi.alpha_kappa_t},
             {"alpha_psi_t", c.vi.alpha_psi_t},
             {"alpha_kappa_a", c.vi.alpha_kappa_a},
             {"alpha_psi_a", c.vi.alpha_psi_a},
             {"alpha_A", c.vi.alpha_A},
             {"negatives_ratio", c.vi.negatives_ratio},
             {"batch_size", c.vi.batch_size},
             {"epochs", c.vi.epochs},
             {"learning_rate", c.vi.learning_rate},
             {"optimizer", vi::optimizer_name(c.vi.optimizer)},
             {"mc_samples", c.vi.mc_samples},
             {"predict_weight", c.vi.predict_weight}};
  j["mf"] = {{"factors", c.mf.factors},
             {"regularization", c.mf.regularization},
             {"confidence_alpha", c.mf.confidence_alpha},
             {"iterations", c.mf.iterations}};
  j["bpr"] = {{"factors", c.bpr.factors},
              {"learning_rate", c.bpr.learning_rate},
              {"regularization", c.bpr.regularization},
              {"epochs", c.bpr.epochs}};
  j["eval"] = {{"ks", c.eval.ks},
               {"recommend_k", c.eval.recommend_k},
               {"exclude_purchased", c.eval.exclude_purchased},
               {"models", c.eval.models}};
  j["synth"] = {{"users", c.synth.users},           {"categories", c.synth.categories},
                {"blocks", c.synth.blocks},         {"noise", c.synth.noise},
                {"train_days", c.synth.train_days}, {"test_days", c.synth.test_days},
                {"start_time", c.synth.start_time}};
  return j.dump(2) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) { return dump_config(a) == dump_config(b); }

}  // namespace catrec::cli
