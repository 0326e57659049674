#include "catrec/skipgram.hpp"

#include <algorithm>
#include <cmath>

#include "catrec/kernels.hpp"
#include "catrec/mathutil.hpp"

namespace catrec::skipgram {

void SgnsConfig::validate() const {
  if (dim < 1) throw ConfigError("skipgram dim must be >= 1");
  if (window < 1) throw ConfigError("skipgram window must be >= 1");
  if (negatives < 1) throw ConfigError("skipgram negatives must be >= 1");
  if (!(lr_end > 0.0 && lr_end <= lr_start)) throw ConfigError("skipgram needs 0 < lr_end <= lr_start");
  if (!(unigram_power >= 0.0)) throw ConfigError("skipgram unigram_power must be >= 0");
}

std::vector<ContextPair> extract_contexts(const hetgraph::Walk& walk, std::size_t window) {
  if (window < 1) throw ConfigError("context window must be >= 1");
  std::vector<ContextPair> out;
  const auto& w = walk.nodes;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t lo = i >= window ? i - window : 0;
    const std::size_t hi = std::min(w.size() - 1, i + window);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) out.push_back({w[i], w[j]});
    }
  }
  return out;
}

double softmax_prob(const EmbeddingTable& table, NodeRef context, NodeRef center) {
  const auto v = table.at(center);
  const auto c = table.at(context);
  std::vector<double> logits(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) logits[r] = kernels::dot(table.row(r), v);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  return std::exp(kernels::dot(c, v) - mx) / z;
}

double sgns_loss(const SkipGramTables& t, std::size_t center, std::size_t context,
                 std::span<const std::size_t> negatives) {
  const auto v = t.input.row(center);
  double loss = -log_sigmoid(kernels::dot(t.output.row(context), v));
  for (auto k : negatives) loss -= log_sigmoid(-kernels::dot(t.output.row(k), v));
  return loss;
}

double sgns_gradient(const SkipGramTables& t, std::size_t center, std::size_t context,
                     std::span<const std::size_t> negatives, SgnsGradient& grad) {
  const auto d = t.input.dim();
  const auto v = t.input.row(center);
  grad.center.assign(d, 0.0);
  grad.context.assign(d, 0.0);
  grad.negatives.assign(negatives.size(), std::vector<double>(d, 0.0));

  const double sc = kernels::dot(t.output.row(context), v);
  double loss = -log_sigmoid(sc);
  const double gc = sigmoid(sc) - 1.0;
  kernels::axpy(gc, v, grad.context);
  kernels::axpy(gc, t.output.row(context), grad.center);
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const auto o = t.output.row(negatives[k]);
    const double sk = kernels::dot(o, v);
    loss -= log_sigmoid(-sk);
    const double gk = sigmoid(sk);
    kernels::axpy(gk, v, grad.negatives[k]);
    kernels::axpy(gk, o, grad.center);
  }
  return loss;
}

namespace {

// Exact gradient step: all scores use pre-step vectors.
double step_with_scratch(SkipGramTables& t, std::size_t center, std::size_t context,
                         std::span<const std::size_t> negatives, double lr, std::vector<double>& center_grad,
                         std::vector<double>& coeff) {
  const auto v = t.input.row(center);
  const std::size_t k = negatives.size();
  coeff.resize(k + 1);

  const double sc = kernels::dot(t.output.row(context), v);
  double loss = -log_sigmoid(sc);
  coeff[0] = sigmoid(sc) - 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double s = kernels::dot(t.output.row(negatives[i]), v);
    loss -= log_sigmoid(-s);
    coeff[i + 1] = sigmoid(s);
  }
  if (!std::isfinite(loss)) throw DivergenceError("non-finite skip-gram loss");

  center_grad.assign(v.size(), 0.0);
  kernels::axpy(coeff[0], t.output.row(context), center_grad);
  for (std::size_t i = 0; i < k; ++i) kernels::axpy(coeff[i + 1], t.output.row(negatives[i]), center_grad);

  kernels::axpy(-lr * coeff[0], v, t.output.row(context));
  for (std::size_t i = 0; i < k; ++i) kernels::axpy(-lr * coeff[i + 1], v, t.output.row(negatives[i]));
  kernels::axpy(-lr, center_grad, v);
  return loss;
}

}  // namespace

double sgns_step(SkipGramTables& t, std::size_t center, std::size_t context,
                 std::span<const std::size_t> negatives, double lr) {
  if (std::find(negatives.begin(), negatives.end(), context) != negatives.end()) {
    throw ConfigError("negative sample equals the positive context");
  }
  std::vector<double> center_grad, coeff;
  return step_with_scratch(t, center, context, negatives, lr, center_grad, coeff);
}

NegativeSampler::NegativeSampler(const std::array<std::vector<double>, kNodeTypeCount>& counts, double power) {
  for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
    double run = 0.0;
    cumulative_[t].reserve(counts[t].size());
    for (double c : counts[t]) {
      if (c > 0.0) {
        run += std::pow(c, power);
        ++support_[t];
      }
      cumulative_[t].push_back(run);
    }
  }
}

std::size_t NegativeSampler::support(NodeType type) const noexcept {
  return support_[static_cast<std::size_t>(type)];
}

std::vector<Index> NegativeSampler::sample(NodeType type, std::size_t count, Index exclude, Rng& rng) const {
  const auto& cum = cumulative_[static_cast<std::size_t>(type)];
  if (support(type) < count + 1) {
    throw DataError("node type " + type_name(type) + " has too few nodes for " + std::to_string(count) +
                    " negatives");
  }
  std::vector<Index> out;
  out.reserve(count);
  const double total = cum.back();
  while (out.size() < count) {
    const double x = rng.uniform() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), x);
    if (it == cum.end()) --it;
    const auto idx = static_cast<Index>(it - cum.begin());
    if (idx != exclude) out.push_back(idx);
  }
  return out;
}

std::array<std::vector<double>, kNodeTypeCount> occurrence_counts(const hetgraph::WalkCorpus& corpus) {
  std::array<std::vector<double>, kNodeTypeCount> counts;
  for (const auto& w : corpus.walks) {
    for (const auto n : w.nodes) {
      auto& c = counts[static_cast<std::size_t>(n.type)];
      if (c.size() <= n.index) c.resize(n.index + 1, 0.0);
      c[n.index] += 1.0;
    }
  }
  return counts;
}

TrainResult train_skipgram(const hetgraph::WalkCorpus& corpus, const SgnsConfig& config) {
  config.validate();
  if (corpus.walks.empty()) throw DataError("empty walk corpus");

  const auto counts = occurrence_counts(corpus);
  std::vector<NodeRef> nodes;
  for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
    for (std::size_t i = 0; i < counts[t].size(); ++i) {
      if (counts[t][i] > 0.0) nodes.push_back({static_cast<NodeType>(t), static_cast<Index>(i)});
    }
  }

  TrainResult result;
  result.tables.input = EmbeddingTable(config.dim, nodes);
  result.tables.output = EmbeddingTable(config.dim, nodes);
  {
    Rng init(derive_seed(config.seed, 0x1417));
    const double half = 0.5 / static_cast<double>(config.dim);
    for (double& x : result.tables.input.data()) x = init.uniform(-half, half);
  }

  // Pairs as table rows.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& w : corpus.walks) {
    for (const auto& p : extract_contexts(w, config.window)) {
      pairs.emplace_back(static_cast<std::uint32_t>(*result.tables.input.find(p.center)),
                         static_cast<std::uint32_t>(*result.tables.input.find(p.context)));
    }
  }
  result.pairs = pairs.size();
  if (config.epochs == 0 || pairs.empty()) return result;

  const NegativeSampler sampler(counts, config.unigram_power);
  const auto& table_nodes = result.tables.input.nodes();
  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(pairs.size());
  std::size_t step = 0;
  std::vector<double> center_grad, coeff;
  std::vector<std::size_t> neg_rows;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng order(derive_seed(config.seed, epoch, 1));
    Rng neg_rng(derive_seed(config.seed, epoch, 2));
    order.shuffle(pairs.begin(), pairs.end());
    double loss_sum = 0.0;
    for (const auto& [center, context] : pairs) {
      const double frac = total_steps > 1.0 ? static_cast<double>(step) / (total_steps - 1.0) : 0.0;
      const double lr = config.lr_start - (config.lr_start - config.lr_end) * frac;
      ++step;

      const NodeRef ctx = table_nodes[context];
      const std::size_t available = sampler.support(ctx.type);
      const std::size_t k = std::min(config.negatives, available > 0 ? available - 1 : 0);
      neg_rows.clear();
      if (k > 0) {
        for (const auto idx : sampler.sample(ctx.type, k, ctx.index, neg_rng)) {
          neg_rows.push_back(*result.tables.output.find({ctx.type, idx}));
        }
      }
      try {
        loss_sum += step_with_scratch(result.tables, center, context, neg_rows, lr, center_grad, coeff);
      } catch (const DivergenceError&) {
        throw DivergenceError("skip-gram diverged", static_cast<int>(epoch));
      }
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(pairs.size()));
  }
  if (!result.tables.input.all_finite()) throw DivergenceError("non-finite skip-gram embedding");
  return result;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(kernels::dot(a, a));
  const double nb = std::sqrt(kernels::dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return kernels::dot(a, b) / (na * nb);
}

}  // namespace catrec::skipgram
