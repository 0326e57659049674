#include "catrec/vimodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "catrec/kernels.hpp"
#include "catrec/mathutil.hpp"
#include "catrec/ranking.hpp"

namespace catrec::vi {

namespace {

constexpr std::size_t gi(Group g) { return static_cast<std::size_t>(g); }

constexpr double kInitLogStd = -3.0;
constexpr double kColdStd = 0.1;

bool all_finite(const VariationalParams& p) {
  for (const auto& b : p.blocks) {
    for (double v : b.mean) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : b.logstd) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

// Bias-corrected Adam moments, one slot per variational parameter.
class AdamState {
 public:
  AdamState(const VariationalParams& shape) : m_(zeroed(shape)), v_(zeroed(shape)) {}

  void ascend(VariationalParams& params, const VariationalParams& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t g = 0; g < kGroupCount; ++g) {
      update(params.blocks[g].mean, grad.blocks[g].mean, m_.blocks[g].mean, v_.blocks[g].mean, lr, c1, c2);
      update(params.blocks[g].logstd, grad.blocks[g].logstd, m_.blocks[g].logstd, v_.blocks[g].logstd, lr, c1, c2);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  static VariationalParams zeroed(const VariationalParams& shape) {
    VariationalParams z = shape;
    for (auto& b : z.blocks) {
      std::fill(b.mean.begin(), b.mean.end(), 0.0);
      std::fill(b.logstd.begin(), b.logstd.end(), 0.0);
    }
    return z;
  }

  static void update(std::vector<double>& x, const std::vector<double>& g, std::vector<double>& m,
                     std::vector<double>& v, double lr, double c1, double c2) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      x[i] += lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
    }
  }

  VariationalParams m_, v_;
  std::size_t t_ = 0;
};

}  // namespace

const char* optimizer_name(Optimizer o) noexcept { return o == Optimizer::adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw ConfigError("unknown optimizer: " + std::string(name) + " (expected sgd or adam)");
}

void Hyperparameters::validate() const {
  if (dim < 1) throw ConfigError("vi dim must be >= 1");
  for (double a : {alpha_bu, alpha_bv, alpha_kappa_t, alpha_psi_t, alpha_kappa_a, alpha_psi_a, alpha_A}) {
    if (!(a > 0.0)) throw ConfigError("vi precisions must be positive");
  }
  if (!(negatives_ratio >= 0.0)) throw ConfigError("vi negatives_ratio must be >= 0");
  if (batch_size < 1) throw ConfigError("vi batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("vi learning_rate must be positive");
  if (mc_samples < 1) throw ConfigError("vi mc_samples must be >= 1");
  if (!std::isfinite(predict_weight)) throw ConfigError("vi predict_weight must be finite");
}

const char* group_name(Group g) noexcept {
  switch (g) {
    case Group::user_emb: return "u";
    case Group::cat_emb: return "v";
    case Group::user_bias: return "bu";
    case Group::cat_bias: return "bv";
    case Group::kappa_t: return "kappa_t";
    case Group::psi_t: return "psi_t";
    case Group::kappa_a: return "kappa_a";
    case Group::psi_a: return "psi_a";
  }
  return "?";
}

VariationalParams VariationalParams::zeros(std::size_t dim, std::size_t users, std::size_t categories) {
  const std::array<std::size_t, kGroupCount> sizes = {users * dim, categories * dim, users, categories, 1, 1, 1, 1};
  VariationalParams p;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    p.blocks[g].mean.assign(sizes[g], 0.0);
    p.blocks[g].logstd.assign(sizes[g], 0.0);
  }
  return p;
}

Prior prior_for(Group g, const Hyperparameters& h) {
  switch (g) {
    case Group::user_emb:
    case Group::cat_emb: return {0.0, 1.0};
    case Group::user_bias: return {0.0, 1.0 / std::sqrt(h.alpha_bu)};
    case Group::cat_bias: return {0.0, 1.0 / std::sqrt(h.alpha_bv)};
    case Group::kappa_t: return {1.0, 1.0 / std::sqrt(h.alpha_kappa_t)};
    case Group::psi_t: return {0.0, 1.0 / std::sqrt(h.alpha_psi_t)};
    case Group::kappa_a: return {1.0, 1.0 / std::sqrt(h.alpha_kappa_a)};
    case Group::psi_a: return {0.0, 1.0 / std::sqrt(h.alpha_psi_a)};
  }
  return {0.0, 1.0};
}

Noise Noise::draw(const VariationalParams& shape, Rng& rng) {
  Noise n;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    n.eps[g].resize(shape.blocks[g].size());
    for (double& e : n.eps[g]) e = rng.normal();
  }
  return n;
}

Noise Noise::zeros(const VariationalParams& shape) {
  Noise n;
  for (std::size_t g = 0; g < kGroupCount; ++g) n.eps[g].assign(shape.blocks[g].size(), 0.0);
  return n;
}

ModelSample sample_from(const LatentState& latent, const Noise& noise) {
  ModelSample s;
  s.dim = latent.dim;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    const auto& b = latent.params.blocks[g];
    auto& out = s.values[g];
    out.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b.mean[i] + std::exp(b.logstd[i]) * noise.eps[g][i];
  }
  return s;
}

ModelSample mean_sample(const LatentState& latent) {
  ModelSample s;
  s.dim = latent.dim;
  for (std::size_t g = 0; g < kGroupCount; ++g) s.values[g] = latent.params.blocks[g].mean;
  return s;
}

double jj_lambda(double xi) {
  const double x = std::abs(xi);
  if (x < 1e-4) return 0.125 - x * x / 96.0 + x * x * x * x / 960.0;
  return std::tanh(0.5 * x) / (4.0 * x);
}

double jj_bound(double x, double xi) {
  return log_sigmoid(xi) + 0.5 * (x - xi) - jj_lambda(xi) * (x * x - xi * xi);
}

double score(const ModelSample& s, Index p, Index q) {
  return kernels::dot(s.user(p), s.category(q)) + s.user_bias(p) + s.category_bias(q);
}

double log_lik_T(const ModelSample& s, std::span<const TEntry> batch) {
  double ll = 0.0;
  for (const auto& e : batch) {
    const double sign = 2.0 * e.t - 1.0;
    ll += jj_bound(sign * (s.kappa_t() * score(s, e.p, e.q) + s.psi_t()), e.xi);
  }
  if (!std::isfinite(ll)) throw DivergenceError("non-finite transaction log-likelihood");
  return ll;
}

double log_lik_A(const ModelSample& s, std::span<const AEntry> batch, double alpha_A) {
  const double c = 0.5 * std::log(alpha_A / (2.0 * std::numbers::pi));
  double ll = 0.0;
  for (const auto& e : batch) {
    const double r = e.a - (s.kappa_a() * score(s, e.p, e.q) + s.psi_a());
    ll += c - 0.5 * alpha_A * r * r;
  }
  if (!std::isfinite(ll)) throw DivergenceError("non-finite affinity log-likelihood");
  return ll;
}

double kl_gaussian(double q_mean, double q_logstd, double p_mean, double p_std) {
  const double var_ratio = std::exp(2.0 * q_logstd) / (p_std * p_std);
  const double dm = q_mean - p_mean;
  return std::log(p_std) - q_logstd + 0.5 * (var_ratio + dm * dm / (p_std * p_std)) - 0.5;
}

double kl_gaussian(std::span<const double> q_mean, std::span<const double> q_logstd, double p_mean,
                   double p_std) {
  double kl = 0.0;
  for (std::size_t i = 0; i < q_mean.size(); ++i) kl += kl_gaussian(q_mean[i], q_logstd[i], p_mean, p_std);
  return kl;
}

double kl_total(const LatentState& latent, const Hyperparameters& h) {
  double kl = 0.0;
  for (const auto g : kAllGroups) {
    const auto prior = prior_for(g, h);
    kl += kl_gaussian(latent.params[g].mean, latent.params[g].logstd, prior.mean, prior.stddev);
  }
  return kl;
}

ElboTerms elbo(const LatentState& latent, std::span<const TEntry> batch_T, std::span<const AEntry> batch_A,
               const Noise& noise, double scale_T, double scale_A, const Hyperparameters& h,
               VariationalParams* grad) {
  const ModelSample s = sample_from(latent, noise);
  const std::size_t d = latent.dim;

  // Gradient w.r.t. the sampled values.
  std::array<std::vector<double>, kGroupCount> gs;
  if (grad) {
    for (std::size_t g = 0; g < kGroupCount; ++g) gs[g].assign(s.values[g].size(), 0.0);
  }

  ElboTerms terms;
  const double kt = s.kappa_t(), pt = s.psi_t(), ka = s.kappa_a(), pa = s.psi_a();

  for (const auto& e : batch_T) {
    const auto u = s.user(e.p);
    const auto v = s.category(e.q);
    const double sc = kernels::dot(u, v) + s.user_bias(e.p) + s.category_bias(e.q);
    const double sign = 2.0 * e.t - 1.0;
    const double x = sign * (kt * sc + pt);
    terms.log_lik_T += jj_bound(x, e.xi);
    if (grad) {
      const double gx = scale_T * (0.5 - 2.0 * jj_lambda(e.xi) * x) * sign;
      const double ds = gx * kt;
      gs[gi(Group::kappa_t)][0] += gx * sc;
      gs[gi(Group::psi_t)][0] += gx;
      kernels::axpy(ds, v, std::span<double>(gs[gi(Group::user_emb)].data() + e.p * d, d));
      kernels::axpy(ds, u, std::span<double>(gs[gi(Group::cat_emb)].data() + e.q * d, d));
      gs[gi(Group::user_bias)][e.p] += ds;
      gs[gi(Group::cat_bias)][e.q] += ds;
    }
  }

  const double log_norm = 0.5 * std::log(h.alpha_A / (2.0 * std::numbers::pi));
  for (const auto& e : batch_A) {
    const auto u = s.user(e.p);
    const auto v = s.category(e.q);
    const double sc = kernels::dot(u, v) + s.user_bias(e.p) + s.category_bias(e.q);
    const double r = e.a - (ka * sc + pa);
    terms.log_lik_A += log_norm - 0.5 * h.alpha_A * r * r;
    if (grad) {
      const double gmu = scale_A * h.alpha_A * r;
      const double ds = gmu * ka;
      gs[gi(Group::kappa_a)][0] += gmu * sc;
      gs[gi(Group::psi_a)][0] += gmu;
      kernels::axpy(ds, v, std::span<double>(gs[gi(Group::user_emb)].data() + e.p * d, d));
      kernels::axpy(ds, u, std::span<double>(gs[gi(Group::cat_emb)].data() + e.q * d, d));
      gs[gi(Group::user_bias)][e.p] += ds;
      gs[gi(Group::cat_bias)][e.q] += ds;
    }
  }

  terms.kl = kl_total(latent, h);
  terms.value = scale_T * terms.log_lik_T + scale_A * terms.log_lik_A - terms.kl;

  if (grad) {
    if (grad->blocks[0].size() != latent.params.blocks[0].size()) {
      *grad = VariationalParams::zeros(latent.dim, latent.users, latent.categories);
    }
    for (const auto g : kAllGroups) {
      const auto prior = prior_for(g, h);
      const double inv_pvar = 1.0 / (prior.stddev * prior.stddev);
      const auto& b = latent.params[g];
      auto& out = (*grad)[g];
      const auto& eps = noise.eps[gi(g)];
      const auto& gz = gs[gi(g)];
      for (std::size_t i = 0; i < b.size(); ++i) {
        const double sigma = std::exp(b.logstd[i]);
        out.mean[i] = gz[i] - (b.mean[i] - prior.mean) * inv_pvar;
        out.logstd[i] = gz[i] * sigma * eps[i] - (sigma * sigma * inv_pvar - 1.0);
      }
    }
  }
  return terms;
}

LatentState init_latent_state(const EmbeddingTable& embeddings, const ingest::IdMaps& maps,
                              const SparseMatrix& transactions, const Hyperparameters& h, Rng& rng) {
  h.validate();
  if (embeddings.dim() != h.dim) {
    throw ConfigError("embedding dimension " + std::to_string(embeddings.dim()) + " does not match vi dim " +
                      std::to_string(h.dim));
  }
  LatentState st;
  st.dim = h.dim;
  st.users = maps.users.size();
  st.categories = maps.categories.size();
  if (transactions.rows() != st.users || transactions.cols() != st.categories) {
    throw DataError("transaction matrix shape does not match id maps");
  }
  st.params = VariationalParams::zeros(st.dim, st.users, st.categories);

  auto fill = [&](Group g, NodeType type, std::size_t count) {
    auto& mean = st.params[g].mean;
    for (std::size_t i = 0; i < count; ++i) {
      const NodeRef node{type, static_cast<Index>(i)};
      auto dst = std::span<double>(mean.data() + i * st.dim, st.dim);
      if (const auto row = embeddings.find(node)) {
        std::copy_n(embeddings.row(*row).begin(), st.dim, dst.begin());
      } else {
        for (double& x : dst) x = rng.normal(0.0, kColdStd);
        ++st.cold_nodes;
      }
    }
  };
  fill(Group::user_emb, NodeType::user, st.users);
  fill(Group::cat_emb, NodeType::category, st.categories);

  for (auto& b : st.params.blocks) std::fill(b.logstd.begin(), b.logstd.end(), kInitLogStd);
  st.params[Group::kappa_t].mean[0] = 1.0;
  st.params[Group::kappa_a].mean[0] = 1.0;

  st.xi = transactions;
  for (double& x : st.xi.values()) x = 1.0;
  return st;
}

void update_xi(LatentState& latent, const Hyperparameters& h, Rng& rng) {
  const std::size_t d = latent.dim;
  const auto& P = latent.params;
  std::array<std::vector<double>, kGroupCount> sigma;
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    const auto& ls = P.blocks[g].logstd;
    sigma[g].resize(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) sigma[g][i] = std::exp(ls[i]);
  }
  auto draw = [&](Group g, std::size_t i) { return P[g].mean[i] + sigma[gi(g)][i] * rng.normal(); };

  std::vector<double> u(d), v(d);
  auto values = latent.xi.values();
  std::size_t k = 0;
  for (std::size_t p = 0; p < latent.xi.rows(); ++p) {
    for (const Index q : latent.xi.row_cols(p)) {
      double acc = 0.0;
      for (std::size_t s = 0; s < h.mc_samples; ++s) {
        for (std::size_t j = 0; j < d; ++j) u[j] = draw(Group::user_emb, p * d + j);
        for (std::size_t j = 0; j < d; ++j) v[j] = draw(Group::cat_emb, q * d + j);
        const double sc = kernels::dot(u, v) + draw(Group::user_bias, p) + draw(Group::cat_bias, q);
        const double x = draw(Group::kappa_t, 0) * sc + draw(Group::psi_t, 0);
        acc += x * x;
      }
      values[k++] = std::sqrt(acc / static_cast<double>(h.mc_samples));
    }
  }
}

FitTrace fit_from(LatentState& state, const SparseMatrix& transactions,
                  const affinity::NormalizedAffinity& affinity, const Hyperparameters& h) {
  h.validate();
  if (!state.xi.same_support(transactions)) throw DataError("xi support differs from the transaction matrix");
  const std::size_t m = state.users, n = state.categories;
  const auto positives = transactions.triplets();
  const std::size_t total = m * n;
  const std::size_t nnz = positives.size();
  const std::size_t n_neg = std::min<std::size_t>(
      static_cast<std::size_t>(std::llround(h.negatives_ratio * static_cast<double>(nnz))), total - nnz);

  std::vector<AEntry> a_entries;
  for (const auto& t : affinity.values.triplets()) a_entries.push_back({t.row, t.col, t.value});

  FitTrace trace;
  std::vector<TEntry> t_entries;
  VariationalParams grad = VariationalParams::zeros(state.dim, m, n);
  AdamState adam(state.params);

  for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
    Rng rng(derive_seed(h.seed, 0x56494649, epoch));

    t_entries.clear();
    const auto xi = state.xi.values();
    for (std::size_t k = 0; k < nnz; ++k) t_entries.push_back({positives[k].row, positives[k].col, 1.0, xi[k]});
    for (std::size_t k = 0; k < n_neg;) {
      const auto p = static_cast<Index>(rng.index(m));
      const auto q = static_cast<Index>(rng.index(n));
      if (transactions.contains(p, q)) continue;
      t_entries.push_back({p, q, 0.0, 1.0});
      ++k;
    }
    // Appended negatives are mixed into the positives so every batch sees both.
    rng.shuffle(t_entries.begin(), t_entries.end());
    rng.shuffle(a_entries.begin(), a_entries.end());

    const std::size_t nb = std::max<std::size_t>(1, (t_entries.size() + h.batch_size - 1) / h.batch_size);
    trace.batches_per_epoch = nb;
    double elbo_sum = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t t_lo = b * h.batch_size, t_hi = std::min(t_entries.size(), t_lo + h.batch_size);
      const std::size_t a_lo = b * a_entries.size() / nb, a_hi = (b + 1) * a_entries.size() / nb;
      const std::span<const TEntry> bt(t_entries.data() + t_lo, t_hi - t_lo);
      const std::span<const AEntry> ba(a_entries.data() + a_lo, a_hi - a_lo);
      const double scale_T = bt.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(bt.size());
      const double scale_A =
          ba.empty() ? 0.0 : static_cast<double>(a_entries.size()) / static_cast<double>(ba.size());

      const Noise noise = Noise::draw(state.params, rng);
      const auto terms = elbo(state, bt, ba, noise, scale_T, scale_A, h, &grad);
      if (!std::isfinite(terms.value)) throw DivergenceError("non-finite ELBO", static_cast<int>(epoch));
      elbo_sum += terms.value;

      if (h.optimizer == Optimizer::adam) {
        adam.ascend(state.params, grad, h.learning_rate);
      } else {
        for (std::size_t g = 0; g < kGroupCount; ++g) {
          kernels::axpy(h.learning_rate, grad.blocks[g].mean, state.params.blocks[g].mean);
          kernels::axpy(h.learning_rate, grad.blocks[g].logstd, state.params.blocks[g].logstd);
        }
      }
    }
    if (!all_finite(state.params)) throw DivergenceError("non-finite variational parameters", static_cast<int>(epoch));
    trace.epoch_elbo.push_back(elbo_sum / static_cast<double>(nb));
    update_xi(state, h, rng);
  }
  return trace;
}

FitResult fit(const SparseMatrix& transactions, const affinity::NormalizedAffinity& affinity,
              const EmbeddingTable& embeddings, const ingest::IdMaps& maps, const Hyperparameters& h) {
  Rng rng(derive_seed(h.seed, 0x494e4954));
  FitResult r;
  r.state = init_latent_state(embeddings, maps, transactions, h, rng);
  r.trace = fit_from(r.state, transactions, affinity, h);
  return r;
}

std::vector<double> predict_scores(const LatentState& latent, Index p, const Hyperparameters& h, Rng& rng) {
  if (p >= latent.users) throw ConfigError("user index out of range");
  const std::size_t d = latent.dim, n = latent.categories;
  const auto& P = latent.params;
  auto sd = [&](Group g, std::size_t i) { return std::exp(P[g].logstd[i]); };

  // Every category shares one noise draw per sample, so each per-category
  // score keeps its marginal expectation while score differences carry
  // far less Monte Carlo noise.
  std::vector<double> v_sd(n * d), bv_sd(n);
  for (std::size_t j = 0; j < n * d; ++j) v_sd[j] = sd(Group::cat_emb, j);
  for (std::size_t q = 0; q < n; ++q) bv_sd[q] = sd(Group::cat_bias, q);
  const std::span<const double> v_mean = P[Group::cat_emb].mean;
  const auto& bv_mean = P[Group::cat_bias].mean;

  std::vector<double> u(d), ue(d), s(n), noise_part(n), acc_t(n, 0.0), acc_a(n, 0.0);
  for (std::size_t it = 0; it < h.mc_samples; ++it) {
    for (std::size_t j = 0; j < d; ++j) u[j] = P[Group::user_emb].mean[p * d + j] + sd(Group::user_emb, p * d + j) * rng.normal();
    for (std::size_t j = 0; j < d; ++j) ue[j] = u[j] * rng.normal();
    const double bu = P[Group::user_bias].mean[p] + sd(Group::user_bias, p) * rng.normal();
    const double e_bv = rng.normal();
    kernels::matvec(v_mean, u, s);
    kernels::matvec(v_sd, ue, noise_part);
    for (std::size_t q = 0; q < n; ++q) s[q] += noise_part[q] + bu + bv_mean[q] + bv_sd[q] * e_bv;
    const double kt = P[Group::kappa_t].mean[0] + sd(Group::kappa_t, 0) * rng.normal();
    const double pt = P[Group::psi_t].mean[0] + sd(Group::psi_t, 0) * rng.normal();
    const double ka = P[Group::kappa_a].mean[0] + sd(Group::kappa_a, 0) * rng.normal();
    const double pa = P[Group::psi_a].mean[0] + sd(Group::psi_a, 0) * rng.normal();
    for (std::size_t q = 0; q < n; ++q) {
      acc_t[q] += sigmoid(kt * s[q] + pt);
      acc_a[q] += ka * s[q] + pa;
    }
  }
  const double inv = 1.0 / static_cast<double>(h.mc_samples);
  std::vector<double> out(n);
  for (std::size_t q = 0; q < n; ++q) out[q] = acc_t[q] * inv + h.predict_weight * acc_a[q] * inv;
  return out;
}

std::vector<Index> recommend(const LatentState& latent, Index p, std::size_t k, const Hyperparameters& h, Rng& rng,
                             const std::vector<bool>* exclude) {
  if (k < 1 || k > latent.categories) throw ConfigError("recommend needs 1 <= k <= number of categories");
  const auto scores = predict_scores(latent, p, h, rng);
  return top_k(scores, k, exclude);
}

std::uint64_t prediction_seed(const Hyperparameters& h, Index p) { return derive_seed(h.seed, 0x50524544, p); }

}  // namespace catrec::vi
