#pragma once

#include <cstdint>
#include <random>

namespace feedopt {

// Session RNG. All randomness of a solve session flows from one seed so
// that identical (instance, seed, params) reproduce byte-identical output.
// Draw helpers avoid std::uniform_*_distribution, whose output is not
// pinned by the standard across library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // uniform real in [0, 1)
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  // uniform real in [0, hi)
  double uniform(double hi) { return uniform() * hi; }

  // uniform integer in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(engine_() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace feedopt
