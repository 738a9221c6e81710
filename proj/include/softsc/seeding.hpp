#pragma once

#include <cstdint>
#include <string_view>

namespace softsc {

// SplitMix64 finalizer: the mixing step behind the counter-based streams.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One root seed expands to independent per-label (task), per-counter
// (draw) streams; the result depends only on its inputs, so parallel
// schedules cannot perturb it.
inline uint64_t derive_stream(uint64_t root, std::string_view label,
                              uint64_t counter = 0) {
  return splitmix64(splitmix64(root ^ fnv1a(label)) ^ counter);
}

// Uniform double in [0, 1) from one counter draw.
inline uint64_t stream_draw(uint64_t stream_seed, uint64_t counter) {
  return splitmix64(stream_seed ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

inline double stream_uniform(uint64_t stream_seed, uint64_t counter) {
  return static_cast<double>(stream_draw(stream_seed, counter) >> 11) *
         0x1.0p-53;
}

}  // namespace softsc
