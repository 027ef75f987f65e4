#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace scfn {

/// Counter-based splittable pseudo-random stream.
///
/// Core generator: SplitMix64 in counter mode. The word at position c of a
/// stream is fin(key + (c+1)*GOLDEN) where fin is the SplitMix64 finalizer
/// and key is a hash of (seed, stream_id). Draws are addressed by counter,
/// so replaying a stream or drawing from derived streams in any order gives
/// identical values. The construction is fixed; changing it invalidates
/// every recorded seed.
class RngStream {
public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id), counter_(0) {
    key_ = mix64(mix64(seed + kGolden) ^ (stream_id * kMul + kSalt));
  }

  /// Root stream for a run seed.
  static RngStream root(std::uint64_t seed) { return RngStream(seed, 0); }

  /// Child stream for slot k. Distinct k (and distinct derivation chains)
  /// give statistically independent streams; counter starts at 0.
  RngStream derive(std::uint64_t k) const {
    RngStream child;
    child.seed_ = seed_;
    child.stream_ = mix64(stream_ * kGolden ^ mix64(k + kSalt));
    child.counter_ = 0;
    child.key_ = mix64(mix64(seed_ + kGolden) ^ (child.stream_ * kMul + kSalt));
    return child;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  /// Next raw 64-bit word; advances the counter by 1.
  std::uint64_t next_word() { return word_at(counter_++); }

  /// Uniform double in [0,1); advances the counter by 1.
  double next_uniform() { return to_unit(next_word()); }

  /// n uniform doubles in [0,1); advances the counter by n.
  std::vector<double> uniform(std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = next_uniform();
    return out;
  }

  /// Normal draw via Box-Muller: two uniforms per value (cosine branch),
  /// so n draws advance the counter by 2n. sigma == 0 returns mu exactly.
  double next_normal(double mu, double sigma) {
    if (sigma < 0) throw std::invalid_argument("rng_normal: sigma must be >= 0");
    const std::uint64_t w0 = next_word();
    const std::uint64_t w1 = next_word();
    const double u1 = static_cast<double>((w0 >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = to_unit(w1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * (r * std::cos(2.0 * kPi * u2));
  }

  std::vector<double> normal(std::size_t n, double mu, double sigma) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = next_normal(mu, sigma);
    return out;
  }

  /// Uniform integer in [0, bound) via 128-bit multiply; advances by 1.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_word()) * bound) >> 64);
  }

private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kMul = 0xbf58476d1ce4e5b9ULL;
  static constexpr std::uint64_t kSalt = 0x94d049bb133111ebULL;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1.0p-53;  // [0,1)
  }

  std::uint64_t word_at(std::uint64_t c) const {
    return mix64(key_ + (c + 1) * kGolden);
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t key_ = 0;
};

/// Fixed derivation slots, so independent consumers never share a stream.
namespace rng_slot {
constexpr std::uint64_t kInit = 1;
constexpr std::uint64_t kSplit = 2;
constexpr std::uint64_t kShuffle = 3;
constexpr std::uint64_t kAugment = 4;
constexpr std::uint64_t kDropout = 5;
constexpr std::uint64_t kSynthetic = 6;
}  // namespace rng_slot

}  // namespace scfn
