#include "xintent/kernels.hpp"

#include <cmath>

namespace xintent::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sumsq_diff(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double beta1_t, double beta2_t) {
  const double c1 = 1.0 - beta1;
  const double c2 = 1.0 - beta2;
  const double bc1 = 1.0 - beta1_t;
  const double bc2 = 1.0 - beta2_t;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + c1 * g[i];
    v[i] = beta2 * v[i] + c2 * (g[i] * g[i]);
    const double mh = m[i] / bc1;
    const double vh = v[i] / bc2;
    p[i] -= lr * (mh / (std::sqrt(vh) + eps));
  }
}

}  // namespace xintent::kernels::scalar
