#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace thermoface {

// Seeded generator with platform-independent draws. std::mt19937_64 output
// is fixed by the standard; the distributions in <random> are not, so the
// conversions to reals and bounded integers live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via Box-Muller (no cached second value).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Combines two seeds into one (splitmix64 finalizer over the pair).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace thermoface
