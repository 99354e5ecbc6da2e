#include "xintent/kernels.hpp"

#if XINTENT_KERNELS_HAVE_AVX2_BUILD

#include <immintrin.h>

#include <cmath>

// Compiled with -mavx2 only (no -mfma): elementwise ops use explicit
// mul/add and stay bit-identical to the scalar backend. Reductions keep
// four lanes and fold at the end, so dot/sumsq_diff differ from scalar
// only by summation order.

namespace xintent::kernels::avx2 {

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}
}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, yv));
  }
  double r = hsum(acc);
  for (std::size_t i = n4; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d av = _mm256_set1_pd(a);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d av = _mm256_set1_pd(a);
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (std::size_t i = n4; i < n; ++i) x[i] *= a;
}

double sumsq_diff(const double* x, const double* y, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double r = hsum(acc);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = x[i] - y[i];
    r += d * d;
  }
  return r;
}

void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double beta1_t, double beta2_t) {
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d c1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d c2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d bc1 = _mm256_set1_pd(1.0 - beta1_t);
  const __m256d bc2 = _mm256_set1_pd(1.0 - beta2_t);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    mv = _mm256_add_pd(_mm256_mul_pd(b1, mv), _mm256_mul_pd(c1, gv));
    vv = _mm256_add_pd(_mm256_mul_pd(b2, vv), _mm256_mul_pd(c2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mh = _mm256_div_pd(mv, bc1);
    const __m256d vh = _mm256_div_pd(vv, bc2);
    const __m256d step =
        _mm256_mul_pd(lrv, _mm256_div_pd(mh, _mm256_add_pd(_mm256_sqrt_pd(vh), epsv)));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  if (n4 < n) {
    scalar::adam_step(p + n4, g + n4, m + n4, v + n4, n - n4, lr, beta1, beta2,
                      eps, beta1_t, beta2_t);
  }
}

}  // namespace xintent::kernels::avx2

#endif  // XINTENT_KERNELS_HAVE_AVX2_BUILD
