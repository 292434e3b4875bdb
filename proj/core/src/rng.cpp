#include "trustfed/rng.hpp"

namespace trustfed {
namespace {

// splitmix64; the usual seed expander, also a decent mixer for combining ids.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t realization,
                          StreamRole role, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(master);
  h = mix(h, realization);
  h = mix(h, static_cast<std::uint64_t>(role));
  h = mix(h, a);
  h = mix(h, b);
  return h;
}

}  // namespace trustfed
