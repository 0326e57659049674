#pragma once

// Dual-matrix probabilistic factorization fitted by stochastic variational
// inference.
//
// Observations:
//   T_pq ~ Bernoulli(sigmoid(kappa_t * s_pq + psi_t))      every (p, q)
//   A_pq ~ Normal(kappa_a * s_pq + psi_a, 1 / alpha_A)     nonzero A only
//   s_pq = u_p . v_q + bu_p + bv_q
//
// Priors: u_p, v_q ~ N(0, I); bu ~ N(0, 1/alpha_bu); bv ~ N(0, 1/alpha_bv);
// kappa ~ N(1, 1/alpha_kappa); psi ~ N(0, 1/alpha_psi).
//
// The Bernoulli log-likelihood is replaced by the Jaakkola-Jordan quadratic
// lower bound with one auxiliary xi per observed positive (negatives share
// xi = 1). The variational family is a fully factorized Gaussian; gradients
// use the reparameterization z = mean + exp(logstd) * eps.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "catrec/affinity.hpp"
#include "catrec/embedding.hpp"
#include "catrec/ingest.hpp"
#include "catrec/rng.hpp"
#include "catrec/sparse.hpp"

namespace catrec::vi {

enum class Optimizer { sgd, adam };

const char* optimizer_name(Optimizer o) noexcept;
Optimizer parse_optimizer(std::string_view name);  // throws ConfigError

struct Hyperparameters {
  std::size_t dim = 64;
  double alpha_bu = 1.0;
  double alpha_bv = 1.0;
  double alpha_kappa_t = 1.0;
  double alpha_psi_t = 1.0;
  double alpha_kappa_a = 1.0;
  double alpha_psi_a = 1.0;
  double alpha_A = 1.0;
  double negatives_ratio = 4.0;
  std::size_t batch_size = 256;
  std::size_t epochs = 120;
  double learning_rate = 1e-4;
  Optimizer optimizer = Optimizer::sgd;
  std::size_t mc_samples = 64;
  double predict_weight = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class Group : std::size_t {
  user_emb = 0,
  cat_emb,
  user_bias,
  cat_bias,
  kappa_t,
  psi_t,
  kappa_a,
  psi_a,
};

constexpr std::size_t kGroupCount = 8;
constexpr std::array<Group, kGroupCount> kAllGroups = {Group::user_emb, Group::cat_emb, Group::user_bias,
                                                        Group::cat_bias, Group::kappa_t, Group::psi_t,
                                                        Group::kappa_a,  Group::psi_a};

const char* group_name(Group g) noexcept;

struct GaussianBlock {
  std::vector<double> mean;
  std::vector<double> logstd;

  std::size_t size() const noexcept { return mean.size(); }
  friend bool operator==(const GaussianBlock&, const GaussianBlock&) = default;
};

/// Means and log-stds of all eight variable groups. Also used as the shape
/// of ELBO gradients.
struct VariationalParams {
  std::array<GaussianBlock, kGroupCount> blocks;

  GaussianBlock& operator[](Group g) { return blocks[static_cast<std::size_t>(g)]; }
  const GaussianBlock& operator[](Group g) const { return blocks[static_cast<std::size_t>(g)]; }

  static VariationalParams zeros(std::size_t dim, std::size_t users, std::size_t categories);
  friend bool operator==(const VariationalParams&, const VariationalParams&) = default;
};

struct LatentState {
  std::size_t dim = 0;
  std::size_t users = 0;
  std::size_t categories = 0;
  VariationalParams params;
  SparseMatrix xi;  // support = observed positives of T
  std::size_t cold_nodes = 0;

  friend bool operator==(const LatentState&, const LatentState&) = default;
};

struct Prior {
  double mean;
  double stddev;
};

Prior prior_for(Group g, const Hyperparameters& h);

/// Standard-normal draws with the same shape as the variational parameters.
struct Noise {
  std::array<std::vector<double>, kGroupCount> eps;

  static Noise draw(const VariationalParams& shape, Rng& rng);
  static Noise zeros(const VariationalParams& shape);
};

/// Concrete values of every latent variable.
struct ModelSample {
  std::size_t dim = 0;
  std::array<std::vector<double>, kGroupCount> values;

  std::span<const double> user(Index p) const { return {values[0].data() + p * dim, dim}; }
  std::span<const double> category(Index q) const { return {values[1].data() + q * dim, dim}; }
  double user_bias(Index p) const { return values[2][p]; }
  double category_bias(Index q) const { return values[3][q]; }
  double kappa_t() const { return values[4][0]; }
  double psi_t() const { return values[5][0]; }
  double kappa_a() const { return values[6][0]; }
  double psi_a() const { return values[7][0]; }
};

// mean + exp(logstd) * eps, elementwise.
ModelSample sample_from(const LatentState& latent, const Noise& noise);

// Posterior means as a sample (noise = 0).
ModelSample mean_sample(const LatentState& latent);

struct TEntry {
  Index p = 0;
  Index q = 0;
  double t = 0.0;   // 0 or 1
  double xi = 1.0;  // JJ auxiliary for this entry
};

struct AEntry {
  Index p = 0;
  Index q = 0;
  double a = 0.0;  // normalized affinity
};

// lambda(xi) = tanh(xi/2) / (4 xi); lambda(0) = 1/8.
double jj_lambda(double xi);

// log s(xi) + (x - xi)/2 - lambda(xi) (x^2 - xi^2) <= log s(x).
double jj_bound(double x, double xi);

double score(const ModelSample& s, Index p, Index q);

double log_lik_T(const ModelSample& s, std::span<const TEntry> batch);
double log_lik_A(const ModelSample& s, std::span<const AEntry> batch, double alpha_A);

// KL(N(q_mean, exp(q_logstd)^2) || N(p_mean, p_std^2)) summed over coordinates.
double kl_gaussian(std::span<const double> q_mean, std::span<const double> q_logstd, double p_mean, double p_std);
double kl_gaussian(double q_mean, double q_logstd, double p_mean, double p_std);

double kl_total(const LatentState& latent, const Hyperparameters& h);

struct ElboTerms {
  double value = 0.0;
  double log_lik_T = 0.0;  // unscaled
  double log_lik_A = 0.0;  // unscaled
  double kl = 0.0;
};

/// scale_T * LL_T(sample) + scale_A * LL_A(sample) - KL, with the sample
/// a deterministic transform of `noise`. When `grad` is given it receives
/// the gradient w.r.t. every mean and log-std (same shape as params).
ElboTerms elbo(const LatentState& latent, std::span<const TEntry> batch_T, std::span<const AEntry> batch_A,
               const Noise& noise, double scale_T, double scale_A, const Hyperparameters& h,
               VariationalParams* grad = nullptr);

// Variational means from the embedding table (tokens u<p>, c<q>); cold nodes
// get N(0, 0.1^2) means. xi = 1 on the support of `transactions`.
LatentState init_latent_state(const EmbeddingTable& embeddings, const ingest::IdMaps& maps,
                              const SparseMatrix& transactions, const Hyperparameters& h, Rng& rng);

// xi_pq = sqrt(mean of x^2 over h.mc_samples draws of x = kappa_t s_pq + psi_t).
void update_xi(LatentState& latent, const Hyperparameters& h, Rng& rng);

struct FitTrace {
  std::vector<double> epoch_elbo;  // mean per-batch ELBO
  std::size_t batches_per_epoch = 0;
};

struct FitResult {
  LatentState state;
  FitTrace trace;
};

/// Stochastic gradient ascent on the ELBO. Per epoch: observed positives plus
/// negatives_ratio * nnz freshly sampled unobserved pairs are shuffled and
/// batched alongside an equal number of A batches; xi is refreshed at the
/// end of each epoch. Throws DivergenceError carrying the epoch index.
FitResult fit(const SparseMatrix& transactions, const affinity::NormalizedAffinity& affinity,
              const EmbeddingTable& embeddings, const ingest::IdMaps& maps, const Hyperparameters& h);

// Continues from an explicit state (used by fit and by tests).
FitTrace fit_from(LatentState& state, const SparseMatrix& transactions,
                  const affinity::NormalizedAffinity& affinity, const Hyperparameters& h);

/// Posterior-predictive score for every category:
///   mean_S sigmoid(kappa_t s + psi_t) + w * mean_S (kappa_a s + psi_a)
/// Each of the S samples uses one noise draw shared by all categories.
std::vector<double> predict_scores(const LatentState& latent, Index p, const Hyperparameters& h, Rng& rng);

// Top-k by predict_scores; ties by ascending index. `exclude` (optional)
// flags categories to skip, e.g. previously purchased ones.
std::vector<Index> recommend(const LatentState& latent, Index p, std::size_t k, const Hyperparameters& h,
                             Rng& rng, const std::vector<bool>* exclude = nullptr);

// Rng stream used for user p's predictions; keeps scoring order-independent.
std::uint64_t prediction_seed(const Hyperparameters& h, Index p);

// Directory layout: manifest.txt, u_mean.emb, u_logstd.emb, v_mean.emb,
// v_logstd.emb, scalars.txt, xi.txt.
void save_latent(const std::filesystem::path& dir, const LatentState& latent, std::uint64_t seed,
                 std::size_t epochs);
LatentState load_latent(const std::filesystem::path& dir);

}  // namespace catrec::vi
