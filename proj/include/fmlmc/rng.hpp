#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fmlmc {

/// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives independent stream keys from a root seed and up to three words of
/// context (purpose tag, replicate, level, sample index, ...).  Every sampling
/// site in the library is keyed this way, so results do not depend on the
/// order in which streams are consumed: replicates can run concurrently and
/// still reproduce the sequential run bit for bit.
inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t k = mix64(root);
  k = mix64(k ^ (a + 0x9e3779b97f4a7c15ULL));
  k = mix64(k ^ (b + 0xbf58476d1ce4e5b9ULL));
  k = mix64(k ^ (c + 0x94d049bb133111ebULL));
  return k;
}

/// Context tags for derive_stream; keep values stable, they are part of the
/// reproducibility contract of serialized runs.
enum class StreamTag : std::uint64_t {
  estimator_sample = 1,
  pilot_sample = 2,
  lengthscale_field = 3,
  generic = 4,
};

inline std::uint64_t derive_stream(std::uint64_t root, StreamTag tag,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  return derive_stream(root, static_cast<std::uint64_t>(tag), b, c);
}

/// Counter-based generator: a SplitMix64 walk from a derived key.  Uniforms
/// and normals are produced by fixed arithmetic (Box-Muller), not by
/// std::distributions, so sequences are identical across standard libraries.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t stream_key) : state_(stream_key) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1]; never returns 0, so log() is safe.
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, pairwise).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace fmlmc
