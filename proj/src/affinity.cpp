#include "catrec/affinity.hpp"

#include <cmath>
#include <sstream>

#include "catrec/textio.hpp"

namespace catrec::affinity {

double NormalizedAffinity::to_raw(double value) const { return std::expm1(value * scale + shift); }

double decay_weight(double delta_t, double half_life) {
  if (!(half_life > 0.0)) throw ConfigError("half_life must be positive");
  if (delta_t < 0.0) throw ConfigError("negative elapsed time in decay_weight");
  return std::exp2(-delta_t / half_life);
}

InteractionMatrices build_matrices(const ingest::TransactionLog& train, const ingest::IdMaps& maps,
                                   double half_life, Timestamp reference_time) {
  const auto m = maps.users.size();
  const auto n = maps.categories.size();
  std::vector<Triplet> t_entries, a_entries;
  t_entries.reserve(train.size());
  a_entries.reserve(train.size());
  for (const auto& r : train.records) {
    if (r.timestamp > reference_time) {
      throw DataError("transaction at " + std::to_string(r.timestamp) + " is after reference time " +
                      std::to_string(reference_time));
    }
    const auto p = maps.users.find(r.user_id);
    const auto q = maps.categories.find(r.category_id);
    if (!p || !q) continue;
    const double w = decay_weight(static_cast<double>(reference_time - r.timestamp), half_life);
    t_entries.push_back({*p, *q, 1.0});
    a_entries.push_back({*p, *q, w});
  }
  InteractionMatrices out;
  out.transactions = SparseMatrix::from_triplets(m, n, std::move(t_entries));
  for (double& v : out.transactions.values()) v = 1.0;
  out.affinity = SparseMatrix::from_triplets(m, n, std::move(a_entries));
  out.reference_time = reference_time;
  return out;
}

NormalizedAffinity normalize_affinity(const SparseMatrix& a) {
  if (a.nnz() < 2) throw DataError("affinity normalization needs at least two entries");
  const auto raw = a.values();
  double mean = 0.0;
  for (double v : raw) mean += std::log1p(v);
  mean /= static_cast<double>(raw.size());
  double var = 0.0;
  for (double v : raw) {
    const double d = std::log1p(v) - mean;
    var += d * d;
  }
  var /= static_cast<double>(raw.size());
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) throw DataError("affinity has zero variance");

  NormalizedAffinity out{a, mean, sd};
  for (double& v : out.values.values()) v = (std::log1p(v) - mean) / sd;
  return out;
}

SparseMatrix denormalize(const NormalizedAffinity& n) {
  SparseMatrix out = n.values;
  for (double& v : out.values()) v = n.to_raw(v);
  return out;
}

void write_matrices(const std::filesystem::path& dir, const InteractionMatrices& mats,
                    const NormalizedAffinity& norm) {
  textio::write_triples(dir / "T.txt", mats.transactions);
  textio::write_triples(dir / "A.txt", mats.affinity);
  const std::string header =
      "shift=" + textio::format_double(norm.shift) + " scale=" + textio::format_double(norm.scale);
  textio::write_triples(dir / "A_norm.txt", norm.values, header);
}

InteractionMatrices read_matrices(const std::filesystem::path& dir, std::size_t users, std::size_t categories) {
  InteractionMatrices out;
  out.transactions = textio::read_triples(dir / "T.txt", users, categories);
  out.affinity = textio::read_triples(dir / "A.txt", users, categories);
  return out;
}

NormalizedAffinity read_normalized(const std::filesystem::path& dir, std::size_t users, std::size_t categories) {
  std::string header;
  NormalizedAffinity out;
  out.values = textio::read_triples(dir / "A_norm.txt", users, categories, &header);
  std::istringstream in(header);
  std::string tok;
  bool have_shift = false, have_scale = false;
  while (in >> tok) {
    if (tok.starts_with("shift=")) {
      out.shift = textio::parse_double(tok.substr(6));
      have_shift = true;
    } else if (tok.starts_with("scale=")) {
      out.scale = textio::parse_double(tok.substr(6));
      have_scale = true;
    }
  }
  if (!have_shift || !have_scale) throw DataError("A_norm.txt header must carry shift= and scale=");
  return out;
}

}  // namespace catrec::affinity
