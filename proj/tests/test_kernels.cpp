#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "xintent/kernels.hpp"
#include "xintent/rng.hpp"

namespace k = xintent::kernels;

namespace {

std::vector<double> random_vec(xintent::Rng& rng, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.range(lo, hi);
  return v;
}

// Sizes chosen to cover the empty case, sub-width tails, exact SIMD widths
// and larger buffers.
const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 64, 1000, 1003};

}  // namespace

TEST_CASE("scalar dot matches hand-computed values") {
  const double x[] = {1.0, 2.0, 3.0};
  const double y[] = {4.0, -5.0, 6.0};
  CHECK(k::scalar::dot(x, y, 3) == doctest::Approx(12.0).epsilon(1e-15));
  CHECK(k::scalar::dot(x, y, 0) == 0.0);
  CHECK(k::scalar::dot(x, y, 1) == 4.0);
}

TEST_CASE("scalar axpy and scal match hand-computed values") {
  double y[] = {1.0, 1.0, 1.0};
  const double x[] = {1.0, 2.0, 3.0};
  k::scalar::axpy(0.5, x, y, 3);
  CHECK(y[0] == 1.5);
  CHECK(y[1] == 2.0);
  CHECK(y[2] == 2.5);
  k::scalar::scal(2.0, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 4.0);
  CHECK(y[2] == 5.0);
}

TEST_CASE("scalar sumsq_diff matches hand-computed values") {
  const double x[] = {1.0, 2.0, 3.0};
  const double y[] = {0.0, 4.0, 3.0};
  CHECK(k::scalar::sumsq_diff(x, y, 3) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(k::scalar::sumsq_diff(x, x, 3) == 0.0);
}

TEST_CASE("scalar adam_step matches a hand-computed first step") {
  // p=1, g=0.5, fresh moments, lr=0.1, defaults beta1=0.9 beta2=0.999.
  // m1 = 0.05, v1 = 0.00025, mhat = 0.5, vhat = 0.25,
  // p' = 1 - 0.1 * 0.5 / (0.5 + 1e-8).
  double p = 1.0, g = 0.5, m = 0.0, v = 0.0;
  k::scalar::adam_step(&p, &g, &m, &v, 1, 0.1, 0.9, 0.999, 1e-8, 0.9, 0.999);
  CHECK(m == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(v == doctest::Approx(0.00025).epsilon(1e-15));
  const double expected = 1.0 - 0.1 * (0.05 / 0.1) / (std::sqrt(0.00025 / 0.001) + 1e-8);
  CHECK(p == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("scalar adam_step bias correction uses the decay powers") {
  // Second step with beta1_t = beta1^2: correction denominators change.
  double p = 1.0, m = 0.0, v = 0.0;
  double g = 1.0;
  k::scalar::adam_step(&p, &g, &m, &v, 1, 0.01, 0.9, 0.999, 1e-8, 0.9, 0.999);
  g = -1.0;
  k::scalar::adam_step(&p, &g, &m, &v, 1, 0.01, 0.9, 0.999, 1e-8, 0.9 * 0.9,
                       0.999 * 0.999);
  // Recompute the two steps longhand.
  double em = 0.0, ev = 0.0, ep = 1.0;
  em = 0.9 * em + 0.1 * 1.0;
  ev = 0.999 * ev + 0.001 * 1.0;
  ep -= 0.01 * (em / (1.0 - 0.9)) / (std::sqrt(ev / (1.0 - 0.999)) + 1e-8);
  em = 0.9 * em + 0.1 * -1.0;
  ev = 0.999 * ev + 0.001 * 1.0;
  ep -= 0.01 * (em / (1.0 - 0.81)) / (std::sqrt(ev / (1.0 - 0.998001)) + 1e-8);
  CHECK(p == doctest::Approx(ep).epsilon(1e-15));
}

TEST_CASE("active backend reports a known name and honors the scalar override") {
  const std::string name = k::active().name;
  CHECK((name == "scalar" || name == "avx2"));
  if (!k::cpu_has_avx2()) CHECK(name == "scalar");
  // The dispatched wrappers go through the same table.
  const double x[] = {1.0, 2.0};
  const double y[] = {3.0, 4.0};
  CHECK(k::dot(x, y, 2) == k::active().dot(x, y, 2));
}

#if XINTENT_KERNELS_HAVE_AVX2_BUILD

TEST_CASE("avx2 elementwise kernels are bit-identical to scalar") {
  if (!k::cpu_has_avx2()) return;
  xintent::Rng rng(20240811);
  for (std::size_t n : kSizes) {
    for (int rep = 0; rep < 8; ++rep) {
      const auto x = random_vec(rng, n);
      const double a = rng.range(-3.0, 3.0);

      auto y_ref = random_vec(rng, n);
      auto y_simd = y_ref;
      k::scalar::axpy(a, x.data(), y_ref.data(), n);
      k::avx2::axpy(a, x.data(), y_simd.data(), n);
      CHECK(std::memcmp(y_ref.data(), y_simd.data(), n * sizeof(double)) == 0);

      auto s_ref = x;
      auto s_simd = x;
      k::scalar::scal(a, s_ref.data(), n);
      k::avx2::scal(a, s_simd.data(), n);
      CHECK(std::memcmp(s_ref.data(), s_simd.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("avx2 adam_step is bit-identical to scalar") {
  if (!k::cpu_has_avx2()) return;
  xintent::Rng rng(77);
  for (std::size_t n : kSizes) {
    auto p_ref = random_vec(rng, n);
    auto g = random_vec(rng, n);
    auto m_ref = random_vec(rng, n, 0.0, 1.0);
    auto v_ref = random_vec(rng, n, 0.0, 1.0);
    auto p_simd = p_ref;
    auto m_simd = m_ref;
    auto v_simd = v_ref;
    k::scalar::adam_step(p_ref.data(), g.data(), m_ref.data(), v_ref.data(), n,
                         0.001, 0.9, 0.999, 1e-8, 0.9, 0.999);
    k::avx2::adam_step(p_simd.data(), g.data(), m_simd.data(), v_simd.data(), n,
                       0.001, 0.9, 0.999, 1e-8, 0.9, 0.999);
    CHECK(std::memcmp(p_ref.data(), p_simd.data(), n * sizeof(double)) == 0);
    CHECK(std::memcmp(m_ref.data(), m_simd.data(), n * sizeof(double)) == 0);
    CHECK(std::memcmp(v_ref.data(), v_simd.data(), n * sizeof(double)) == 0);
  }
}

TEST_CASE("avx2 reductions match scalar up to summation-order rounding") {
  if (!k::cpu_has_avx2()) return;
  xintent::Rng rng(4242);
  for (std::size_t n : kSizes) {
    for (int rep = 0; rep < 8; ++rep) {
      const auto x = random_vec(rng, n);
      const auto y = random_vec(rng, n);
      const double d_ref = k::scalar::dot(x.data(), y.data(), n);
      const double d_simd = k::avx2::dot(x.data(), y.data(), n);
      const double d_tol = 1e-12 * std::max(1.0, std::abs(d_ref));
      CHECK(std::abs(d_ref - d_simd) <= d_tol);

      const double s_ref = k::scalar::sumsq_diff(x.data(), y.data(), n);
      const double s_simd = k::avx2::sumsq_diff(x.data(), y.data(), n);
      const double s_tol = 1e-12 * std::max(1.0, std::abs(s_ref));
      CHECK(std::abs(s_ref - s_simd) <= s_tol);
    }
  }
}

#endif  // XINTENT_KERNELS_HAVE_AVX2_BUILD

TEST_CASE("Rng::below stays in range and shuffle permutes") {
  xintent::Rng rng(9);
  for (std::uint64_t bound : {1ull, 2ull, 3ull, 10ull, 1000ull}) {
    for (int i = 0; i < 200; ++i) CHECK(rng.below(bound) < bound);
  }
  std::vector<int> items = {0, 1, 2, 3, 4, 5, 6, 7};
  auto shuffled = items;
  rng.shuffle(shuffled);
  auto sorted = shuffled;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == items);
}

TEST_CASE("seed_for_instance separates ids and is order-free") {
  const auto a = xintent::seed_for_instance(42, "rec-1");
  const auto b = xintent::seed_for_instance(42, "rec-2");
  const auto c = xintent::seed_for_instance(43, "rec-1");
  CHECK(a != b);
  CHECK(a != c);
  CHECK(a == xintent::seed_for_instance(42, "rec-1"));
}
