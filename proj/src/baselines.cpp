#include "catrec/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>

#include "catrec/kernels.hpp"
#include "catrec/mathutil.hpp"
#include "catrec/rng.hpp"
#include "catrec/textio.hpp"

namespace catrec::baselines {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInitStd = 0.1;

std::vector<double> to_vector(const RowMatrix& m) { return {m.data(), m.data() + m.size()}; }

// Column-major view of T: for each category, the users who bought it.
std::vector<std::vector<Index>> columns_of(const SparseMatrix& t) {
  std::vector<std::vector<Index>> cols(t.cols());
  for (std::size_t p = 0; p < t.rows(); ++p) {
    for (const Index q : t.row_cols(p)) cols[q].push_back(static_cast<Index>(p));
  }
  return cols;
}

// Solves one side of implicit ALS in place. `fixed` holds the other side.
void solve_side(RowMatrix& target, const RowMatrix& fixed, const std::vector<std::vector<Index>>& observed,
                const std::vector<std::vector<double>>& confidence, double reg) {
  const auto d = fixed.cols();
  const Eigen::MatrixXd gram = fixed.transpose() * fixed;
  Eigen::MatrixXd a(d, d);
  Eigen::VectorXd b(d);
  for (std::size_t r = 0; r < observed.size(); ++r) {
    a = gram;
    a.diagonal().array() += reg;
    b.setZero();
    for (std::size_t k = 0; k < observed[r].size(); ++k) {
      const auto y = fixed.row(observed[r][k]).transpose();
      const double c = confidence[r][k];
      a.noalias() += (c - 1.0) * y * y.transpose();
      b.noalias() += c * y;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw DataError("ALS normal equations are not positive definite");
    target.row(static_cast<Eigen::Index>(r)) = llt.solve(b).transpose();
  }
}

}  // namespace

const char* variant_key(Variant v) noexcept {
  switch (v) {
    case Variant::pop: return "pop";
    case Variant::mf: return "mf";
    case Variant::bpr: return "bpr";
    case Variant::m2v: return "m2v";
  }
  return "?";
}

const char* variant_label(Variant v) noexcept {
  switch (v) {
    case Variant::pop: return "Pop";
    case Variant::mf: return "MF";
    case Variant::bpr: return "BPR";
    case Variant::m2v: return "M2V";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view key) noexcept {
  for (const auto v : {Variant::pop, Variant::mf, Variant::bpr, Variant::m2v}) {
    if (key == variant_key(v)) return v;
  }
  return std::nullopt;
}

double BaselineModel::score(Index p, Index q) const {
  const double dot = dim > 0 ? kernels::dot(user(p), item(q)) : 0.0;
  return dot + item_bias[q];
}

std::vector<double> BaselineModel::scores(Index p) const {
  if (p >= users) throw ConfigError("user index out of range");
  std::vector<double> out(categories, 0.0);
  if (dim > 0) kernels::matvec(item_factors, user(p), out);
  for (std::size_t q = 0; q < categories; ++q) out[q] += item_bias[q];
  return out;
}

BaselineModel itempop_fit(const SparseMatrix& counts) {
  BaselineModel m;
  m.variant = Variant::pop;
  m.users = counts.rows();
  m.categories = counts.cols();
  m.item_bias.assign(m.categories, 0.0);
  for (std::size_t p = 0; p < counts.rows(); ++p) {
    const auto cols = counts.row_cols(p);
    const auto vals = counts.row_values(p);
    for (std::size_t k = 0; k < cols.size(); ++k) m.item_bias[cols[k]] += vals[k];
  }
  return m;
}

BaselineModel itempop_fit(const ingest::TransactionLog& train, const ingest::IdMaps& maps) {
  std::vector<Triplet> entries;
  entries.reserve(train.size());
  for (const auto& r : train.records) entries.push_back({maps.users.at(r.user_id), maps.categories.at(r.category_id), 1.0});
  return itempop_fit(SparseMatrix::from_triplets(maps.users.size(), maps.categories.size(), std::move(entries)));
}

void AlsConfig::validate() const {
  if (factors < 1) throw ConfigError("als factors must be >= 1");
  if (!(regularization >= 0.0)) throw ConfigError("als regularization must be >= 0");
  if (!(confidence_alpha >= 0.0)) throw ConfigError("als confidence_alpha must be >= 0");
}

double als_objective(const SparseMatrix& t, const BaselineModel& model, const AlsConfig& config) {
  const auto d = static_cast<Eigen::Index>(model.dim);
  const Eigen::Map<const RowMatrix> x(model.user_factors.data(), static_cast<Eigen::Index>(model.users), d);
  const Eigen::Map<const RowMatrix> y(model.item_factors.data(), static_cast<Eigen::Index>(model.categories), d);
  // Sum over all pairs of s^2 = trace((X'X)(Y'Y)); observed pairs corrected below.
  const Eigen::MatrixXd gx = x.transpose() * x;
  const Eigen::MatrixXd gy = y.transpose() * y;
  double obj = (gx.array() * gy.array()).sum();
  for (std::size_t p = 0; p < t.rows(); ++p) {
    const auto cols = t.row_cols(p);
    const auto vals = t.row_values(p);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double s = x.row(static_cast<Eigen::Index>(p)).dot(y.row(cols[k]));
      const double c = 1.0 + config.confidence_alpha * vals[k];
      obj += c * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  obj += config.regularization * (x.squaredNorm() + y.squaredNorm());
  return obj;
}

AlsResult als_fit(const SparseMatrix& t, const AlsConfig& config) {
  config.validate();
  const auto m = static_cast<Eigen::Index>(t.rows());
  const auto n = static_cast<Eigen::Index>(t.cols());
  const auto d = static_cast<Eigen::Index>(config.factors);

  Rng rng(derive_seed(config.seed, 0x414c53));
  RowMatrix x(m, d), y(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(0.0, kInitStd);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal(0.0, kInitStd);

  std::vector<std::vector<Index>> by_user(t.rows());
  std::vector<std::vector<double>> conf_user(t.rows());
  for (std::size_t p = 0; p < t.rows(); ++p) {
    const auto cols = t.row_cols(p);
    const auto vals = t.row_values(p);
    by_user[p].assign(cols.begin(), cols.end());
    for (double v : vals) conf_user[p].push_back(1.0 + config.confidence_alpha * v);
  }
  const auto by_item = columns_of(t);
  std::vector<std::vector<double>> conf_item(t.cols());
  for (std::size_t q = 0; q < t.cols(); ++q) {
    for (const Index p : by_item[q]) conf_item[q].push_back(1.0 + config.confidence_alpha * t.get(p, static_cast<Index>(q)));
  }

  AlsResult r;
  r.model.variant = Variant::mf;
  r.model.users = t.rows();
  r.model.categories = t.cols();
  r.model.dim = config.factors;
  r.model.item_bias.assign(t.cols(), 0.0);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    solve_side(x, y, by_user, conf_user, config.regularization);
    solve_side(y, x, by_item, conf_item, config.regularization);
    r.model.user_factors = to_vector(x);
    r.model.item_factors = to_vector(y);
    r.objective.push_back(als_objective(t, r.model, config));
  }
  r.model.user_factors = to_vector(x);
  r.model.item_factors = to_vector(y);
  return r;
}

void BprConfig::validate() const {
  if (factors < 1) throw ConfigError("bpr factors must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("bpr learning_rate must be positive");
  if (!(regularization >= 0.0)) throw ConfigError("bpr regularization must be >= 0");
}

double bpr_triple_loss(const BaselineModel& m, Index p, Index i, Index j, double reg) {
  const auto u = m.user(p), yi = m.item(i), yj = m.item(j);
  const double x = m.score(p, i) - m.score(p, j);
  const double penalty = kernels::dot(u, u) + kernels::dot(yi, yi) + kernels::dot(yj, yj) +
                         m.item_bias[i] * m.item_bias[i] + m.item_bias[j] * m.item_bias[j];
  return -log_sigmoid(x) + 0.5 * reg * penalty;
}

BprGradient bpr_triple_gradient(const BaselineModel& m, Index p, Index i, Index j, double reg) {
  const auto u = m.user(p), yi = m.item(i), yj = m.item(j);
  const std::size_t d = m.dim;
  BprGradient g;
  g.loss = bpr_triple_loss(m, p, i, j, reg);
  const double x = m.score(p, i) - m.score(p, j);
  g.weight = sigmoid(-x);
  const double dx = -g.weight;
  g.user.resize(d);
  g.pos.resize(d);
  g.neg.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    g.user[k] = dx * (yi[k] - yj[k]) + reg * u[k];
    g.pos[k] = dx * u[k] + reg * yi[k];
    g.neg[k] = -dx * u[k] + reg * yj[k];
  }
  g.pos_bias = dx + reg * m.item_bias[i];
  g.neg_bias = -dx + reg * m.item_bias[j];
  return g;
}

BprResult bpr_fit(const SparseMatrix& t, const BprConfig& config) {
  config.validate();
  const std::size_t m = t.rows(), n = t.cols(), d = config.factors;
  for (std::size_t p = 0; p < m; ++p) {
    const auto c = t.row_cols(p).size();
    if (c == 0) throw DataError("bpr: user " + std::to_string(p) + " has no positive category");
    if (c == n) throw DataError("bpr: user " + std::to_string(p) + " has no negative category");
  }

  BprResult r;
  auto& model = r.model;
  model.variant = Variant::bpr;
  model.users = m;
  model.categories = n;
  model.dim = d;
  Rng init(derive_seed(config.seed, 0x425052));
  model.user_factors.resize(m * d);
  model.item_factors.resize(n * d);
  for (double& v : model.user_factors) v = init.normal(0.0, kInitStd);
  for (double& v : model.item_factors) v = init.normal(0.0, kInitStd);
  model.item_bias.assign(n, 0.0);

  const std::size_t samples = t.nnz();
  const double lr = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 0x425052, epoch + 1));
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      const auto p = static_cast<Index>(rng.index(m));
      const auto pos = t.row_cols(p);
      const Index i = pos[rng.index(pos.size())];
      Index j;
      do {
        j = static_cast<Index>(rng.index(n));
      } while (t.contains(p, j));

      const auto g = bpr_triple_gradient(model, p, i, j, config.regularization);
      if (!std::isfinite(g.loss)) throw DivergenceError("bpr loss is not finite", static_cast<int>(epoch));
      loss_sum += g.loss;
      kernels::axpy(-lr, g.user, std::span<double>(model.user_factors.data() + p * d, d));
      kernels::axpy(-lr, g.pos, std::span<double>(model.item_factors.data() + i * d, d));
      kernels::axpy(-lr, g.neg, std::span<double>(model.item_factors.data() + j * d, d));
      model.item_bias[i] -= lr * g.pos_bias;
      model.item_bias[j] -= lr * g.neg_bias;
    }
    r.epoch_loss.push_back(loss_sum / static_cast<double>(samples));
  }
  return r;
}

BaselineModel m2v_model(const EmbeddingTable& table, std::size_t users, std::size_t categories) {
  BaselineModel m;
  m.variant = Variant::m2v;
  m.users = users;
  m.categories = categories;
  m.dim = table.dim();
  m.user_factors.reserve(users * m.dim);
  m.item_factors.reserve(categories * m.dim);
  for (std::size_t p = 0; p < users; ++p) {
    const auto row = table.at({NodeType::user, static_cast<Index>(p)});
    m.user_factors.insert(m.user_factors.end(), row.begin(), row.end());
  }
  for (std::size_t q = 0; q < categories; ++q) {
    const auto row = table.at({NodeType::category, static_cast<Index>(q)});
    m.item_factors.insert(m.item_factors.end(), row.begin(), row.end());
  }
  m.item_bias.assign(categories, 0.0);
  return m;
}

double m2v_score(const EmbeddingTable& table, Index p, Index q) {
  return kernels::dot(table.at({NodeType::user, p}), table.at({NodeType::category, q}));
}

namespace {

EmbeddingTable as_table(NodeType type, std::size_t count, std::size_t dim, const std::vector<double>& values) {
  std::vector<NodeRef> nodes;
  for (std::size_t i = 0; i < count; ++i) nodes.push_back({type, static_cast<Index>(i)});
  EmbeddingTable t(dim, std::move(nodes));
  std::copy(values.begin(), values.end(), t.data().begin());
  return t;
}

std::vector<double> from_table(const EmbeddingTable& t, NodeType type, std::size_t count, std::size_t dim) {
  if (t.dim() != dim) throw DataError("baseline table dimension mismatch");
  std::vector<double> out;
  out.reserve(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    const auto row = t.at({type, static_cast<Index>(i)});
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

}  // namespace

void save_model(const std::filesystem::path& dir, const BaselineModel& m) {
  textio::write_file(dir / "manifest.txt", std::string("variant=") + variant_key(m.variant) +
                                               " d=" + std::to_string(m.dim) + " m=" + std::to_string(m.users) +
                                               " n=" + std::to_string(m.categories) + "\n");
  textio::write_embeddings(dir / "bias.emb", as_table(NodeType::category, m.categories, 1, m.item_bias));
  if (m.dim > 0) {
    textio::write_embeddings(dir / "users.emb", as_table(NodeType::user, m.users, m.dim, m.user_factors));
    textio::write_embeddings(dir / "items.emb", as_table(NodeType::category, m.categories, m.dim, m.item_factors));
  }
}

BaselineModel load_model(const std::filesystem::path& dir) {
  const auto lines = textio::read_lines(dir / "manifest.txt");
  if (lines.empty()) throw DataError("empty baseline manifest");
  BaselineModel m;
  bool have_variant = false;
  for (const auto tok : textio::split(textio::trim(lines[0]), ' ')) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw DataError("malformed baseline manifest");
    const auto key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "variant") {
      const auto v = parse_variant(value);
      if (!v) throw DataError("unknown baseline variant: " + std::string(value));
      m.variant = *v;
      have_variant = true;
    } else if (key == "d") {
      m.dim = static_cast<std::size_t>(textio::parse_int(value));
    } else if (key == "m") {
      m.users = static_cast<std::size_t>(textio::parse_int(value));
    } else if (key == "n") {
      m.categories = static_cast<std::size_t>(textio::parse_int(value));
    }
  }
  if (!have_variant) throw DataError("baseline manifest lacks a variant");
  m.item_bias = from_table(textio::read_embeddings(dir / "bias.emb"), NodeType::category, m.categories, 1);
  if (m.dim > 0) {
    m.user_factors = from_table(textio::read_embeddings(dir / "users.emb"), NodeType::user, m.users, m.dim);
    m.item_factors = from_table(textio::read_embeddings(dir / "items.emb"), NodeType::category, m.categories, m.dim);
  }
  return m;
}

}  // namespace catrec::baselines
