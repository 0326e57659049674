#pragma once

// Binary transaction matrix T and temporally decayed affinity matrix A over
// (user, category) pairs.

#include <filesystem>

#include "catrec/common.hpp"
#include "catrec/ingest.hpp"
#include "catrec/sparse.hpp"

namespace catrec::affinity {

constexpr double kDefaultHalfLifeSeconds = 30.0 * kSecondsPerDay;

/// T entries are 1, A entries > 0, and both share the same support.
struct InteractionMatrices {
  SparseMatrix transactions;  // T
  SparseMatrix affinity;      // A
  Timestamp reference_time = 0;
};

/// log1p + standardization of the nonzero entries of A:
///   value = (log1p(raw) - shift) / scale
struct NormalizedAffinity {
  SparseMatrix values;
  double shift = 0.0;
  double scale = 1.0;

  double to_raw(double value) const;
};

// 2^(-delta_t / half_life). Throws ConfigError for delta_t < 0 or half_life <= 0.
double decay_weight(double delta_t, double half_life);

// Throws DataError if any train record is later than reference_time.
InteractionMatrices build_matrices(const ingest::TransactionLog& train, const ingest::IdMaps& maps,
                                   double half_life, Timestamp reference_time);

// Throws DataError for fewer than two entries or zero variance.
NormalizedAffinity normalize_affinity(const SparseMatrix& a);

SparseMatrix denormalize(const NormalizedAffinity& n);

// Files: T.txt, A.txt (triples), A_norm.txt (triples with a
// "shift=<f> scale=<f>" header line).
void write_matrices(const std::filesystem::path& dir, const InteractionMatrices& mats,
                    const NormalizedAffinity& norm);
InteractionMatrices read_matrices(const std::filesystem::path& dir, std::size_t users, std::size_t categories);
NormalizedAffinity read_normalized(const std::filesystem::path& dir, std::size_t users, std::size_t categories);

}  // namespace catrec::affinity
