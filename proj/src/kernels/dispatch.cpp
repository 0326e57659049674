#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "catrec/kernels.hpp"

namespace catrec::kernels {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::scale};

#if defined(CATREC_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::scale};
#endif

#if defined(CATREC_HAVE_NEON_KERNELS)
constexpr KernelTable kNeonTable{&neon::dot, &neon::axpy, &neon::scale};
#endif

Backend detect_default() {
  if (const char* env = std::getenv("CATREC_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && backend_supported(Backend::avx2)) return Backend::avx2;
    if (v == "neon" && backend_supported(Backend::neon)) return Backend::neon;
  }
  if (backend_supported(Backend::avx2)) return Backend::avx2;
  if (backend_supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{&table_for(detect_default())};
  return table;
}

std::atomic<Backend>& current_backend() {
  static std::atomic<Backend> backend{detect_default()};
  return backend;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(CATREC_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(CATREC_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return kScalarTable;
    case Backend::avx2:
#if defined(CATREC_HAVE_AVX2_KERNELS)
      return kAvx2Table;
#else
      break;
#endif
    case Backend::neon:
#if defined(CATREC_HAVE_NEON_KERNELS)
      return kNeonTable;
#else
      break;
#endif
  }
  throw std::invalid_argument("kernel backend not compiled in: " + std::string(backend_name(b)));
}

Backend active_backend() noexcept { return current_backend().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw std::invalid_argument("kernel backend not supported here: " +
                                std::string(backend_name(b)));
  }
  current().store(&table_for(b), std::memory_order_relaxed);
  current_backend().store(b, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) {
  current().load(std::memory_order_relaxed)->scale(alpha, x.data(), x.size());
}

void matvec(std::span<const double> rows, std::span<const double> x, std::span<double> out) {
  const std::size_t cols = x.size();
  assert(rows.size() >= out.size() * cols);
  const auto fn = current().load(std::memory_order_relaxed)->dot;
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = fn(rows.data() + r * cols, x.data(), cols);
}

}  // namespace catrec::kernels
