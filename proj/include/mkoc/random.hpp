#ifndef MKOC_RANDOM_HPP
#define MKOC_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace mkoc {

// Unbiased draw in [0, n) by rejection. std::uniform_int_distribution is
// implementation-defined, which would break byte-identical reruns across
// standard libraries.
inline std::uint64_t rng_bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double rng_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with the pinned bounded draw above.
template <typename T>
void shuffle_indices(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng_bounded(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Seed a generator from a base seed plus stream tags so every consumer
// (fold shuffles, k-means seeding, synthetic data) gets an independent,
// reproducible stream.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream,
                                std::uint32_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream, substream};
  return std::mt19937_64(seq);
}

}  // namespace mkoc

#endif
