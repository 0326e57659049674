#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "catrec/affinity.hpp"
#include "catrec/cli.hpp"
#include "catrec/evalkit.hpp"
#include "catrec/project.hpp"
#include "catrec/ranking.hpp"
#include "catrec/textio.hpp"

namespace catrec::cli {

namespace fs = std::filesystem;

namespace paths {
fs::path ingest(const RunConfig& c) { return fs::path(c.workdir) / "ingest"; }
fs::path matrices(const RunConfig& c) { return fs::path(c.workdir) / "matrices"; }
fs::path walk(const RunConfig& c) { return fs::path(c.workdir) / "walk"; }
fs::path skipgram(const RunConfig& c) { return fs::path(c.workdir) / "skipgram"; }
fs::path vi(const RunConfig& c) { return fs::path(c.workdir) / "vi"; }
fs::path baseline(const RunConfig& c, baselines::Variant v) {
  return fs::path(c.workdir) / "baseline" / baselines::variant_key(v);
}
fs::path recommend(const RunConfig& c) { return fs::path(c.workdir) / "recommend"; }
fs::path evaluate(const RunConfig& c) { return fs::path(c.workdir) / "eval"; }
fs::path project(const RunConfig& c) { return fs::path(c.workdir) / "project"; }
}  // namespace paths

namespace {

class Stopwatch {
 public:
  std::string elapsed() const {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "[%.2f s]", s);
    return buf;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_effective_config(const fs::path& dir, const RunConfig& c) {
  textio::write_file(dir / "config.json", dump_config(c));
}

std::string format_trace(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += std::to_string(i) + " " + textio::format_double(values[i]) + "\n";
  return s;
}

// ---- upstream artifacts ----------------------------------------------------

ingest::IdMaps load_maps(const RunConfig& c) { return ingest::read_id_maps(paths::ingest(c)); }

ingest::TransactionLog load_split(const RunConfig& c, const char* name) {
  const auto path = paths::ingest(c) / name;
  textio::require_file(path);
  return ingest::parse_transactions(path).log;
}

Timestamp load_boundary(const RunConfig& c) {
  const auto lines = textio::read_lines(paths::ingest(c) / "split.txt");
  for (const auto& line : lines) {
    for (const auto tok : textio::split(line, ' ')) {
      if (tok.rfind("boundary=", 0) == 0) return textio::parse_int(tok.substr(9));
    }
  }
  throw DataError("split.txt lacks a boundary");
}

SparseMatrix load_transactions(const RunConfig& c, const ingest::IdMaps& maps) {
  return textio::read_triples(paths::matrices(c) / "T.txt", maps.users.size(), maps.categories.size());
}

// Ranked category list for one user, at least k long (or the whole catalog).
using Ranker = std::function<std::vector<Index>(Index p, std::size_t k)>;

Ranker make_ranker(const RunConfig& c, const std::string& model, const ingest::IdMaps& maps, bool exclude_purchased) {
  const std::size_t n = maps.categories.size();
  auto purchased = std::make_shared<SparseMatrix>();
  if (exclude_purchased) *purchased = load_transactions(c, maps);
  auto mask = [purchased, n, exclude_purchased](Index p) {
    std::vector<bool> m;
    if (exclude_purchased) {
      m.assign(n, false);
      for (const Index q : purchased->row_cols(p)) m[q] = true;
    }
    return m;
  };

  if (model == "vi") {
    auto latent = std::make_shared<vi::LatentState>(vi::load_latent(paths::vi(c)));
    if (latent->users != maps.users.size() || latent->categories != n) {
      throw DataError("VI model shape does not match the id maps");
    }
    const auto hyper = c.vi;
    return [latent, hyper, mask, exclude_purchased, n](Index p, std::size_t k) {
      Rng rng(vi::prediction_seed(hyper, p));
      const auto m = mask(p);
      return vi::recommend(*latent, p, std::min(k, n), hyper, rng, exclude_purchased ? &m : nullptr);
    };
  }
  const auto variant = baselines::parse_variant(model);
  if (!variant) throw ConfigError("unknown model: " + model);
  auto bm = std::make_shared<baselines::BaselineModel>(baselines::load_model(paths::baseline(c, *variant)));
  if (bm->users != maps.users.size() || bm->categories != n) {
    throw DataError(std::string(baselines::variant_label(*variant)) + " model shape does not match the id maps");
  }
  return [bm, mask, exclude_purchased](Index p, std::size_t k) {
    const auto scores = bm->scores(p);
    const auto m = mask(p);
    return top_k(scores, k, exclude_purchased ? &m : nullptr);
  };
}

std::string model_label(const std::string& model) {
  if (model == "vi") return "VI";
  const auto v = baselines::parse_variant(model);
  return v ? baselines::variant_label(*v) : model;
}

// ---- stages ----------------------------------------------------------------

void cmd_ingest(const RunConfig& c, std::ostream& out) {
  Stopwatch sw;
  if (c.input.empty()) throw ConfigError("no input file: pass --input or set \"input\" in the config");
  const auto parsed = ingest::parse_transactions(c.input, c.ingest.columns);
  Timestamp boundary = c.ingest.split_time;
  if (boundary == 0) {
    const Timestamp last_day = parsed.log.max_time() / kSecondsPerDay;
    boundary = (last_day + 1 - static_cast<Timestamp>(c.ingest.test_days)) * kSecondsPerDay;
  }
  const auto split = ingest::prepare_splits(parsed.log, boundary, c.ingest.filter);
  const auto maps = ingest::build_id_maps(split.train);

  const auto dir = paths::ingest(c);
  ingest::write_transactions(dir / "train.csv", split.train);
  ingest::write_transactions(dir / "test.csv", split.test);
  ingest::write_id_maps(dir, maps);
  const std::string summary = "rows=" + std::to_string(parsed.log.size()) + " malformed=" +
                              std::to_string(parsed.malformed_rows) + " boundary=" + std::to_string(boundary) +
                              " train=" + std::to_string(split.train.size()) + " test=" +
                              std::to_string(split.test.size()) + " users=" + std::to_string(maps.users.size()) +
                              " categories=" + std::to_string(maps.categories.size()) +
                              " baskets=" + std::to_string(maps.baskets.size());
  textio::write_file(dir / "split.txt", summary + "\n");
  write_effective_config(dir, c);
  out << "ingest: " << summary << " " << sw.elapsed() << "\n";
}

void cmd_matrices(const RunConfig& c, std::ostream& out) {
  Stopwatch sw;
  const auto maps = load_maps(c);
  const auto train = load_split(c, "train.csv");
  const auto boundary = load_boundary(c);
  const auto mats = affinity::build_matrices(train, maps, c.half_life_days * static_cast<double>(kSecondsPerDay), boundary);
  const auto norm = affinity::normalize_affinity(mats.affinity);
  const auto dir = paths::matrices(c);
  affinity::write_matrices(dir, mats, norm);
  write_effective_config(dir, c);
  out << "matrices: " << maps.users.size() << "x" << maps.categories.size() << " nnz=" << mats.transactions.nnz()
      << " reference_time=" << boundary << " log1p-shift=" << fmt(norm.shift) << " scale=" << fmt(norm.scale) << " "
      << sw.elapsed() << "\n";
}

void cmd_walk(const RunConfig& c, std::ostream& out) {
  Stopwatch sw;
  const auto maps = load_maps(c);
  const auto train = load_split(c, "train.csv");
  const auto graph = hetgraph::HeteroGraph::build(train, maps);
  const auto schema = hetgraph::MetapathSchema::parse(c.schema);
  const auto corpus = hetgraph::generate_corpus(graph, schema, c.walk, c.seed, c.threads);
  if (corpus.walks.empty()) throw DataError("random walks produced an empty corpus");
  const auto dir = paths::walk(c);
  hetgraph::write_corpus(dir / "corpus.txt", corpus);
  write_effective_config(dir, c);
  out << "walk: nodes=" << graph.node_count() << " edges=" << graph.edge_count() << " walks=" << corpus.walks.size()
      << " tokens=" << corpus.token_count() << " schema=" << schema.to_string() << " " << sw.elapsed() << "\n";
}

void cmd_skipgram(const RunConfig& c, std::ostream& out) {
  Stopwatch sw;
  const auto corpus = hetgraph::read_corpus(paths::walk(c) / "corpus.txt");
  const auto result = skipgram::train_skipgram(corpus, c.skipgram);
  const auto dir = paths::skipgram(c);
  textio::write_embeddings(dir / "embeddings.emb", result.tables.input);
  textio::write_file(dir / "loss.txt", format_trace(result.epoch_loss));
  write_effective_config(dir, c);
  out << "skipgram: nodes=" << result.tables.input.size() << " dim=" << c.skipgram.dim << " pairs=" << result.pairs;
  if (!result.epoch_loss.empty()) {
    out << " loss " << fmt(result.epoch_loss.front()) << " -> " << fmt(result.epoch_loss.back());
  }
  out << " " << sw.elapsed() << "\n";
}

void cmd_train_vi(const RunConfig& c, std::ostream& out) {
  Stopwatch sw;
  const auto maps = load_maps(c);
  const auto t = load_transactions(c, maps);
  const auto norm = affinity::read_normalized(paths::matrices(c), maps.users.size(), maps.categories.size());
  const auto emb = textio::read_embeddings(paths::skipgram(c) / "embeddings.emb");
  const auto result = vi::fit(t, norm, emb, maps, c.vi);
  const auto dir = paths::vi(c);
  vi::save_latent(dir, result.state, c.vi.seed, c.vi.epochs);
  textio::write_file(dir / "trace.txt", format_trace(result.trace.epoch_elbo));
  write_effective_config(dir, c);
  out << "train-vi: users=" << result.state.users << " categories=" << result.state.categories
      << " cold=" << result.state.cold_nodes << " epochs=" << c.vi.epochs;
  if (!result.trace.epoch_elbo.empty()) {
    out << " elbo " << fmt(result.trace.epoch_elbo.front()) << " -> " << fmt(result.trace.epoch_elbo.back());
  }
  out << " " << sw.elapsed() << "\n";
}

void cmd_baseline(const RunConfig& c, baselines::Variant variant, std::ostream& out) {
  Stopwatch sw;
  const auto maps = load_maps(c);
  baselines::BaselineModel model;
  std::vector<double> trace;
  switch (variant) {
    case baselines::Variant::pop: model = baselines::itempop_fit(load_split(c, "train.csv"), maps); break;
    case baselines::Variant::mf: {
      auto r = baselines::als_fit(load_transactions(c, maps), c.mf);
      model = std::move(r.model);
      trace = std::move(r.objective);
      break;
    }
    case baselines::Variant::bpr: {
      auto r = baselines::bpr_fit(load_transactions(c, maps), c.bpr);
      model = std::move(r.model);
      trace = std::move(r.epoch_loss);
      break;
    }
    case baselines::Variant::m2v:
      model = baselines::m2v_model(textio::read_embeddings(paths::skipgram(c) / "embeddings.emb"), maps.users.size(),
                                   maps.categories.size());
      break;
  }
  const auto dir = paths::baseline(c, variant);
  baselines::save_model(dir, model);
  if (!trace.empty()) textio::write_file(dir / "trace.txt", format_trace(trace));
  write_effective_config(dir, c);
  out << "baseline " << baselines::variant_key(variant) << ": users=" << model.users
      << " categories=" << model.categories << " dim=" << model.dim;
  if (!trace.empty()) out << " trace " << fmt(trace.front()) << " -> " << fmt(trace.back());
  out << " " << sw.elapsed() << "\n";
}

void cmd_recommend(const RunConfig& c, const std::string& model, const std::string& user, std::size_t k,
                   bool exclude, std::ostream& out) {
  Stopwatch sw;
  const auto maps = load_maps(c);
  const auto rank = make_ranker(c, model, maps, exclude);
  auto names = [&](const std::vector<Index>& list) {
    std::string s;
    for (const auto q : list) s += "\t" + maps.categories.name(q);
    return s;
  };
  if (!user.empty()) {
    const auto p = maps.users.find(user);
    if (!p) throw DataError("unknown user: " + user);
    out << user << names(rank(*p, k)) << "\n";
    return;
  }
  std::string s;
  for (Index p = 0; p < maps.users.size(); ++p) s += maps.users.name(p) + names(rank(p, k)) + "\n";
  const auto dir = paths::recommend(c);
  textio::write_file(dir / (model + ".tsv"), s);
  write_effective_config(dir, c);
  out << "recommend " << model << ": users=" << maps.users.size() << " k=" << k << " " << sw.elapsed() << "\n";
}

void cmd_evaluate(const RunConfig& c, const std::vector<std::string>& models, bool exclude, std::ostream& out) {
  Stopwatch sw;
  const auto maps = load_maps(c);
  const auto truth = eval::build_ground_truth(load_split(c, "test.csv"), maps);
  const std::size_t n = maps.categories.size();
  std::size_t kmax = 0;
  for (auto k : c.eval.ks) kmax = std::max(kmax, k);

  std::vector<std::string> labels;
  std::vector<eval::EvalReport> reports;
  for (const auto& m : models) {
    const auto rank = make_ranker(c, m, maps, exclude);
    reports.push_back(eval::evaluate([&](Index p) { return rank(p, kmax); }, truth, c.eval.ks, n));
    labels.push_back(model_label(m));
  }
  const auto table = eval::format_report_table(labels, reports);
  const auto dir = paths::evaluate(c);
  textio::write_file(dir / "report.tsv", table);
  write_effective_config(dir, c);
  out << table;
  out << "evaluate: models=" << models.size() << " users=" << reports.front().users << " " << sw.elapsed() << "\n";
}

void cmd_project2d(const RunConfig& c, const std::string& embeddings, const std::string& types,
                   const std::string& nodes_file, const std::string& out_path, std::ostream& out) {
  Stopwatch sw;
  const fs::path emb_path = embeddings.empty() ? paths::skipgram(c) / "embeddings.emb" : fs::path(embeddings);
  const auto table = textio::read_embeddings(emb_path);
  std::vector<NodeRef> nodes;
  std::vector<std::string> labels;
  if (!nodes_file.empty()) {
    for (const auto& line : textio::read_lines(nodes_file)) {
      const auto t = textio::trim(line);
      if (t.empty()) continue;
      const auto f = textio::split(t, ',');
      nodes.push_back(parse_node_token(textio::trim(f[0])));
      labels.emplace_back(f.size() > 1 ? textio::trim(f[1]) : std::string_view(type_name(nodes.back().type)));
    }
  } else {
    std::vector<bool> wanted(kNodeTypeCount, false);
    for (const auto tok : textio::split(types, ',')) {
      const auto name = textio::trim(tok);
      if (name == "user") wanted[0] = true;
      else if (name == "basket") wanted[1] = true;
      else if (name == "category") wanted[2] = true;
      else throw ConfigError("unknown node type: " + std::string(name));
    }
    for (const auto& n : table.nodes()) {
      if (wanted[static_cast<std::size_t>(n.type)]) {
        nodes.push_back(n);
        labels.push_back(type_name(n.type));
      }
    }
  }
  const auto proj = project::project2d(table, nodes, labels);
  const fs::path dest = out_path.empty() ? paths::project(c) / "projection.csv" : fs::path(out_path);
  textio::write_file(dest, project::format_projection_csv(proj));
  out << "project2d: nodes=" << proj.points.size() << " variance " << fmt(proj.variance[0]) << ", "
      << fmt(proj.variance[1]) << " -> " << dest.string() << " " << sw.elapsed() << "\n";
}

void cmd_synth(const RunConfig& c, const std::string& out_path, std::ostream& out) {
  Stopwatch sw;
  if (out_path.empty()) throw ConfigError("synth needs --out");
  const auto csv = synth::generate_synthetic(c.synth);
  textio::write_file(out_path, csv);
  const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
  out << "synth: users=" << c.synth.users << " categories=" << c.synth.categories << " blocks=" << c.synth.blocks
      << " rows=" << rows << " split_time=" << synth::split_time(c.synth) << " -> " << out_path << " "
      << sw.elapsed() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Category recommendation pipeline: ingest, graph embeddings, variational model, baselines, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, workdir, input;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  app.add_option("--config", config_path, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (1 = deterministic reference)");
  app.add_option("--workdir", workdir, "Directory holding stage artifacts");

  auto* ingest = app.add_subcommand("ingest", "Parse, split and filter the transaction log");
  ingest->add_option("--input", input, "Transaction CSV");
  auto* matrices = app.add_subcommand("matrices", "Build the transaction and temporal affinity matrices");
  auto* walk = app.add_subcommand("walk", "Generate metapath random walks");
  auto* skipgram = app.add_subcommand("skipgram", "Train heterogeneous skip-gram embeddings");
  auto* train_vi = app.add_subcommand("train-vi", "Fit the variational model");

  std::string variant_key;
  auto* baseline = app.add_subcommand("baseline", "Fit a comparison model");
  baseline->add_option("variant", variant_key, "pop | mf | bpr | m2v")->required();

  std::string model = "vi", user;
  std::size_t k = 0;
  bool exclude = false;
  auto* recommend = app.add_subcommand("recommend", "Top-k categories per user");
  recommend->add_option("--model", model, "vi | pop | mf | bpr | m2v");
  recommend->add_option("--user", user, "External user id (default: all users to a file)");
  recommend->add_option("--k", k, "List length (default: eval.recommend_k)");
  recommend->add_flag("--exclude-purchased", exclude, "Skip categories bought in training");

  std::vector<std::string> models;
  auto* evaluate = app.add_subcommand("evaluate", "Ranking metrics on the test window");
  evaluate->add_option("--models", models, "Models to compare (default: eval.models)")->delimiter(',');
  evaluate->add_flag("--exclude-purchased", exclude, "Skip categories bought in training");

  std::string embeddings, types = "category", nodes_file, out_path;
  auto* project2d = app.add_subcommand("project2d", "2-D PCA projection of embeddings");
  project2d->add_option("--embeddings", embeddings, "Embedding file (default: skip-gram output)");
  project2d->add_option("--types", types, "Comma-separated node types to include");
  project2d->add_option("--nodes", nodes_file, "File of node tokens, optionally 'token,label'");
  project2d->add_option("--out", out_path, "Output CSV");

  std::size_t s_users = 0, s_categories = 0, s_blocks = 0;
  double s_noise = -1.0;
  auto* synth = app.add_subcommand("synth", "Write a block-structured synthetic transaction log");
  synth->add_option("--out", out_path, "Output CSV")->required();
  auto* su = synth->add_option("--users", s_users);
  auto* sc = synth->add_option("--categories", s_categories);
  auto* sb = synth->add_option("--blocks", s_blocks);
  auto* sn = synth->add_option("--noise", s_noise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (*seed_opt) {
      c.seed = seed;
      c.propagate_seed();
    }
    if (*threads_opt) c.threads = threads;
    if (!workdir.empty()) c.workdir = workdir;
    if (!input.empty()) c.input = input;
    if (*su) c.synth.users = s_users;
    if (*sc) c.synth.categories = s_categories;
    if (*sb) c.synth.blocks = s_blocks;
    if (*sn) c.synth.noise = s_noise;
    c.validate();

    if (*ingest) cmd_ingest(c, out);
    else if (*matrices) cmd_matrices(c, out);
    else if (*walk) cmd_walk(c, out);
    else if (*skipgram) cmd_skipgram(c, out);
    else if (*train_vi) cmd_train_vi(c, out);
    else if (*baseline) {
      const auto v = baselines::parse_variant(variant_key);
      if (!v) throw ConfigError("unknown baseline: " + variant_key + " (expected pop, mf, bpr or m2v)");
      cmd_baseline(c, *v, out);
    } else if (*recommend) {
      if (model != "vi" && !baselines::parse_variant(model)) throw ConfigError("unknown model: " + model);
      cmd_recommend(c, model, user, k ? k : c.eval.recommend_k, exclude || c.eval.exclude_purchased, out);
    } else if (*evaluate) {
      cmd_evaluate(c, models.empty() ? c.eval.models : models, exclude || c.eval.exclude_purchased, out);
    } else if (*project2d) {
      cmd_project2d(c, embeddings, types, nodes_file, out_path, out);
    } else if (*synth) {
      cmd_synth(c, out_path, out);
    }
    return kOk;
  } catch (const MissingArtifact& e) {
    err << "error: " << e.what() << "\n";
    return kMissingArtifact;
  } catch (const DivergenceError& e) {
    err << "error: numerical divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const ConfigError& e) {
    err << "error: configuration: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "error: data: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace catrec::cli
