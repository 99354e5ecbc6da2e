#include "xintent/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace xintent::kernels {

namespace {

constexpr KernelTable kScalarTable = {
    "scalar",          scalar::dot,       scalar::axpy,
    scalar::scal,      scalar::sumsq_diff, scalar::adam_step,
};

#if XINTENT_KERNELS_HAVE_AVX2_BUILD
constexpr KernelTable kAvx2Table = {
    "avx2",          avx2::dot,       avx2::axpy,
    avx2::scal,      avx2::sumsq_diff, avx2::adam_step,
};
#endif

const KernelTable& select() {
  const char* env = std::getenv("XINTENT_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return kScalarTable;
#if XINTENT_KERNELS_HAVE_AVX2_BUILD
  if (cpu_has_avx2()) return kAvx2Table;
#endif
  return kScalarTable;
}

}  // namespace

bool cpu_has_avx2() {
#if XINTENT_KERNELS_HAVE_AVX2_BUILD && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace xintent::kernels
