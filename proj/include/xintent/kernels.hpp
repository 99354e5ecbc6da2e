#pragma once

#include <cstddef>

// Double-precision kernels behind the classifier, the integrated-gradients
// quadrature and the LIME normal-equation accumulation. A scalar reference
// backend defines the semantics; vector backends must reproduce it (exactly
// for elementwise ops, up to reduction-order rounding for dot/sumsq_diff).
// The backend is picked once per process, so repeated runs of one binary on
// one machine are bit-reproducible.

namespace xintent::kernels {

// Reference implementations.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double sumsq_diff(const double* x, const double* y, std::size_t n);
// One fused Adam update: m,v are the first/second moment buffers,
// beta1_t/beta2_t the decay powers for bias correction at this step.
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double beta1_t, double beta2_t);
}  // namespace scalar

#if !defined(XINTENT_KERNELS_HAVE_AVX2_BUILD)
#if defined(__x86_64__) || defined(_M_X64)
#define XINTENT_KERNELS_HAVE_AVX2_BUILD 1
#else
#define XINTENT_KERNELS_HAVE_AVX2_BUILD 0
#endif
#endif

#if XINTENT_KERNELS_HAVE_AVX2_BUILD
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double sumsq_diff(const double* x, const double* y, std::size_t n);
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double beta1_t, double beta2_t);
}  // namespace avx2
#endif

struct KernelTable {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  double (*sumsq_diff)(const double*, const double*, std::size_t);
  void (*adam_step)(double*, const double*, double*, double*, std::size_t,
                    double, double, double, double, double, double);
};

// True when the running CPU supports AVX2 (always false off x86-64).
bool cpu_has_avx2();

// Active table: AVX2 when the CPU has it, scalar otherwise. Setting the
// environment variable XINTENT_KERNELS=scalar forces the reference backend.
const KernelTable& active();

inline double dot(const double* x, const double* y, std::size_t n) {
  return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline void scal(double a, double* x, std::size_t n) { active().scal(a, x, n); }
inline double sumsq_diff(const double* x, const double* y, std::size_t n) {
  return active().sumsq_diff(x, y, n);
}
inline void adam_step(double* p, const double* g, double* m, double* v,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double beta1_t, double beta2_t) {
  active().adam_step(p, g, m, v, n, lr, beta1, beta2, eps, beta1_t, beta2_t);
}

}  // namespace xintent::kernels
