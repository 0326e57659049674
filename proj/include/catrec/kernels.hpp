#pragma once

// Dense double-precision kernels used in the inner loops of skip-gram
// training, variational inference, ALS and scoring.
//
// Every kernel has a scalar reference implementation and SIMD variants
// (AVX2 on x86-64, NEON on AArch64) chosen at runtime. The SIMD variants
// follow the reference's lane assignment and reduction tree exactly, so all
// backends return bit-identical results. Reduction order for dot():
//
//   lane j accumulates a[i]*b[i] for i = j, j+4, j+8, ... below n & ~3,
//   result = (lane0 + lane1) + (lane2 + lane3), then the tail is added
//   sequentially.

#include <cstddef>
#include <span>
#include <string_view>

namespace catrec::kernels {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b) noexcept;

// Whether the backend was compiled in and the running CPU supports it.
bool backend_supported(Backend b) noexcept;

// Backend in use. Defaults to the best supported one; the environment
// variable CATREC_SIMD=scalar|avx2|neon overrides the default.
Backend active_backend() noexcept;

// Throws std::invalid_argument if the backend is not supported.
void set_backend(Backend b);

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// x *= alpha
void scale(double alpha, std::span<double> x);

// out[r] = dot(rows[r*cols .. r*cols+cols), x) for r < out.size()
void matvec(std::span<const double> rows, std::span<const double> x, std::span<double> out);

// Raw per-backend entry points. Exposed for equivalence testing.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
};

const KernelTable& table_for(Backend b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
}  // namespace neon

}  // namespace catrec::kernels
