#include <cstring>
#include <stdexcept>
#include <vector>

#include "catrec/kernels.hpp"
#include "catrec/rng.hpp"
#include "doctest.h"

using namespace catrec;
using kernels::Backend;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal() * std::exp(rng.uniform(-3.0, 3.0));
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

std::vector<Backend> simd_backends() {
  std::vector<Backend> out;
  for (auto b : {Backend::avx2, Backend::neon}) {
    if (kernels::backend_supported(b)) out.push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("scalar dot follows the documented four-lane reduction") {
  const std::vector<double> a = {1e16, 1.0, -1e16, 1.0, 3.0};
  const std::vector<double> b = {1.0, 1.0, 1.0, 1.0, 1.0};
  // ((1e16 + 1) + (-1e16 + 1)) + 3
  const double expect = ((1e16 + 1.0) + (-1e16 + 1.0)) + 3.0;
  CHECK(same_bits(kernels::scalar::dot(a.data(), b.data(), a.size()), expect));
  CHECK(kernels::scalar::dot(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("SIMD kernels are bit-identical to the scalar reference") {
  const auto backends = simd_backends();
  if (backends.empty()) {
    MESSAGE("no SIMD backend on this machine; scalar only");
    return;
  }
  Rng rng(99);
  for (const auto backend : backends) {
    const auto& t = kernels::table_for(backend);
    for (std::size_t n = 0; n <= 131; ++n) {
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      CHECK(same_bits(t.dot(a.data(), b.data(), n), kernels::scalar::dot(a.data(), b.data(), n)));

      const double alpha = rng.normal();
      auto y1 = b, y2 = b;
      t.axpy(alpha, a.data(), y1.data(), n);
      kernels::scalar::axpy(alpha, a.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

      auto s1 = a, s2 = a;
      t.scale(alpha, s1.data(), n);
      kernels::scalar::scale(alpha, s2.data(), n);
      CHECK(std::memcmp(s1.data(), s2.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("dispatch switches backends and matvec matches per-row dot") {
  Rng rng(5);
  const std::size_t rows = 7, cols = 13;
  const auto m = random_vector(rng, rows * cols);
  const auto x = random_vector(rng, cols);
  const auto original = kernels::active_backend();

  kernels::set_backend(Backend::scalar);
  CHECK(kernels::active_backend() == Backend::scalar);
  std::vector<double> ref(rows);
  kernels::matvec(m, x, ref);
  for (std::size_t r = 0; r < rows; ++r) {
    CHECK(same_bits(ref[r], kernels::scalar::dot(m.data() + r * cols, x.data(), cols)));
  }
  for (const auto backend : simd_backends()) {
    kernels::set_backend(backend);
    std::vector<double> out(rows);
    kernels::matvec(m, x, out);
    CHECK(std::memcmp(out.data(), ref.data(), rows * sizeof(double)) == 0);
  }
  kernels::set_backend(original);
}

TEST_CASE("unsupported backend is rejected") {
  for (auto b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (!kernels::backend_supported(b)) CHECK_THROWS_AS(kernels::set_backend(b), std::invalid_argument);
  }
  CHECK(kernels::backend_supported(Backend::scalar));
  CHECK(kernels::backend_name(Backend::avx2) == "avx2");
}
