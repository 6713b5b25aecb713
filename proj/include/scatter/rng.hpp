#ifndef SCATTER_RNG_HPP
#define SCATTER_RNG_HPP

#include <cstdint>

namespace scatter {

// Counter-based generator keyed by (master seed, sample index, stream tag).
// Each draw mixes an incrementing counter through the splitmix64 finalizer,
// so streams are independent of evaluation order and of each other: sampling
// in parallel yields bitwise the same values as sampling serially.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t sample_index,
             std::uint64_t stream_tag)
      : key_(mix(mix(mix(master_seed) ^ sample_index) ^ stream_tag)) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Uses rejection to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = n * ((~0ull) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream tags used across the ensemble module; fixed so that records are
// reproducible from (seed, sample index, config) alone.
namespace stream {
inline constexpr std::uint64_t kPositions = 1;
inline constexpr std::uint64_t kGapChoice = 2;
inline constexpr std::uint64_t kObservable = 3;
}  // namespace stream

}  // namespace scatter

#endif
