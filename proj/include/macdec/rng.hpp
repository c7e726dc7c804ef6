#pragma once

#include <cstdint>
#include <random>

namespace macdec {

// Seeded generator with hand-rolled distributions so that streams are
// identical across standard libraries, not just across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  int uniform_int(int n) {
    return static_cast<int>(uniform() * static_cast<double>(n));
  }

  // derive an independent stream, e.g. one per parallel run
  Rng split(std::uint64_t salt) {
    std::uint64_t s = next_u64();
    return Rng(s ^ (salt * 0x9e3779b97f4a7c15ull));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace macdec
