#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace xintent {

// mt19937_64 with hand-rolled value mappings. The engine's output stream is
// pinned by the standard, but std::shuffle and the distribution classes are
// not, so portable reproducibility requires doing the mapping ourselves.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in [0, bound) via masked rejection, bias-free. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = ~std::uint64_t{0} >> __builtin_clzll(bound - 1);
    for (;;) {
      std::uint64_t v = engine_() & mask;
      if (v < bound) return v;
    }
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Deterministic per-instance seed: FNV-1a over the global seed bytes, then
// over the instance id, so records are independent and order-insensitive.
inline std::uint64_t seed_for_instance(std::uint64_t global_seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ull;
  for (int s = 0; s < 64; s += 8) {
    h ^= (global_seed >> s) & 0xffu;
    h *= 1099511628211ull;
  }
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace xintent
