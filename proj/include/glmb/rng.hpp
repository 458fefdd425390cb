#pragma once

#include <cstdint>
#include <limits>

namespace glmb {

/// Tags separating the random streams of different consumers.
enum class Domain : std::uint32_t {
  predict = 1,
  birth = 2,
  survival = 3,
  association = 4,
  resample = 5,
  detection = 6,
  clutter = 7,
  test = 99,
};

/// Address of a stream: (step, domain, entity, sub-entity). The draw index
/// inside a stream is the counter of RngStream.
struct StreamPath {
  std::int64_t step = 0;
  Domain domain = Domain::test;
  std::uint64_t entity = 0;
  std::uint64_t sub = 0;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ mix64(v + 0x632be59bd9b4e019ULL));
}

/// Counter-based keyed random stream.
///
/// The key is a hash of (seed, path); draw n is mix64(key + n * golden). Any
/// draw can be addressed directly with the *_at accessors, which is what makes
/// results independent of the order in which parallel workers consume them.
/// Also usable as a UniformRandomBitGenerator for <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, const StreamPath& path) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type bits_at(std::uint64_t draw) const noexcept {
    return mix64(key_ + (draw + 1) * 0x9e3779b97f4a7c15ULL);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform_at(std::uint64_t draw) const noexcept {
    return static_cast<double>(bits_at(draw) >> 11) * 0x1.0p-53;
  }
  /// Standard normal via Box-Muller over draws (2*index, 2*index + 1).
  double normal_at(std::uint64_t index) const noexcept;

  // Sequential interface.
  result_type operator()() noexcept { return bits_at(counter_++); }
  double uniform() noexcept { return uniform_at(counter_++); }
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace glmb
