// Counter-based random number generation.
//
// Every random draw in the library is addressed by a key
// (seed, stream, step, lane) rather than produced from mutable global
// state.  Two consequences matter for reproducibility:
//
//   * results are bit-identical regardless of how work is scheduled
//     across threads, because a draw's value depends only on its key;
//   * independent subsystems (initialisation, driving noise, data
//     sampling, evaluation grids) can never collide, because each owns
//     a distinct stream tag.
//
// The generator itself is the SplitMix64 finaliser applied to a
// 64-bit counter mixed with the key.  It passes the usual statistical
// batteries and is far cheaper than cryptographic counters.
#ifndef MFLAB_RNG_HPP
#define MFLAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace mflab {

/// Distinct sub-stream identifiers.  Each logical source of randomness in
/// the library owns one tag; the numeric values are part of the output
/// format (changing them changes every simulation), so they are fixed.
enum class StreamTag : std::uint64_t {
  Init = 1,       ///< particle initialisation
  Noise = 2,      ///< Brownian increments of the main system
  Batch = 3,      ///< fresh-sample mini-batches
  Dataset = 4,    ///< fixed training datasets
  Eval = 5,       ///< held-out evaluation grids
  AuxInit = 6,    ///< initialisation of auxiliary reference systems
  AuxNoise = 7,   ///< Brownian increments of auxiliary systems
  LabelNoise = 8, ///< additive observation noise on training labels
  Scratch = 9,    ///< tests and ad-hoc sampling
};

/// SplitMix64 finalising permutation: a fixed bijection on 64-bit words
/// with strong avalanche behaviour.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Collapse (seed, stream, step, lane) into a single stream key.
/// Feeding each word through mix64 before combining prevents related
/// keys (e.g. consecutive steps) from producing related streams.
inline std::uint64_t derive_key(std::uint64_t seed, StreamTag tag,
                                std::uint64_t step = 0,
                                std::uint64_t lane = 0) {
  std::uint64_t k = mix64(seed ^ 0x8e9a4be2c1f3d705ULL);
  k = mix64(k ^ static_cast<std::uint64_t>(tag));
  k = mix64(k ^ step);
  k = mix64(k ^ lane);
  return k;
}

/// Stateless-by-construction generator: a key plus a draw counter.
/// Copying a CounterRng and drawing from both copies yields identical
/// sequences; reconstructing one from the same key replays the stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t step = 0,
             std::uint64_t lane = 0)
      : key_(derive_key(seed, tag, step, lane)) {}

  /// Next raw 64-bit word of the stream.
  std::uint64_t next_u64() { return mix64(key_ ^ counter_++); }

  /// Uniform double in (0, 1): 53 random mantissa bits, shifted away
  /// from zero so that log() in Box-Muller is always finite.
  double next_unit() {
    const std::uint64_t bits = next_u64() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is
  /// cached so consecutive calls cost one transform per two draws.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace mflab

#endif  // MFLAB_RNG_HPP
