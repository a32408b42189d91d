#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace som {

// Seed mixing for deriving independent streams (episode, seat, phase) from a
// single run seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt + 0x632be59bd9b4e019ULL));
}

/// Seeded generator with a portable uniform draw. The standard
/// distributions are implementation-defined, so draws go through
/// rejection sampling on the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform index in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[uniform_index(items.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace som
