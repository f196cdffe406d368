#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "byzset/index_set.hpp"

namespace byzset {

/// splitmix64 finalizer; used to derive per-(round, sender, receiver) streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto w : words) h = mix64(h ^ mix64(w));
  return h;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded generator with platform-independent helpers (the standard
/// distributions are not reproducible across library implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }
  /// Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
  /// True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

  template <typename Tag>
  IndexSet<Tag> subset(IndexSet<Tag> of) {
    return IndexSet<Tag>(engine_() & of.bits());
  }

  /// Uniformly chosen subset of `of` with exactly k members.
  template <typename Tag>
  IndexSet<Tag> subset_of_size(IndexSet<Tag> of, std::size_t k) {
    auto pool = of.to_vector();
    IndexSet<Tag> out;
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
      auto j = i + below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.insert(pool[i]);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace byzset
