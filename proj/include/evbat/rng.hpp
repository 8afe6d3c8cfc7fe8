#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evbat {

/// splitmix64 step; the usual seed expander.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic sub-seed derivation: every stream in the pipeline is keyed by
/// (master seed, purpose tag, index). Streams with distinct tags or indices
/// are independent, so per-vehicle / per-round work can run in parallel and
/// still reproduce the sequential output.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t state = master ^ fnv1a64(tag);
  std::uint64_t mixed = splitmix64(state);
  state = mixed + index;
  return splitmix64(state);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::string_view tag,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, tag, index));
}

}  // namespace evbat
