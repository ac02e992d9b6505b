#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace embedcap {

// Counter-based pseudorandom stream with keyed derivation. Every draw is a
// pure function of (key, counter), so codewords can be regenerated lazily
// from their context instead of materializing codebooks, and parallel runs
// are bit-identical to serial ones.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Folds one context word into a key.
constexpr std::uint64_t key_fold(std::uint64_t key, std::uint64_t v) {
  return mix64(mix64(key + kGolden) + v);
}

inline std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t k = 0x8C5F1D3A2E9B74F1ull;
  for (std::uint64_t p : parts) k = key_fold(k, p);
  return k;
}

inline std::uint64_t hash_symbols(std::span<const int> symbols) {
  std::uint64_t h = 0xD6E8FEB86659FD93ull;
  for (int s : symbols) h = key_fold(h, static_cast<std::uint64_t>(s) + 1);
  return h;
}

class KeyStream {
 public:
  explicit KeyStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGolden); }

  // Uniform in [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

// Inverse-CDF draw over a dense pmf row; identical on every platform.
inline int sample_index(std::span<const double> probs, double u) {
  double cum = 0.0;
  const int n = static_cast<int>(probs.size());
  for (int i = 0; i < n; ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  // u landed in the rounding slack past the last cumulative step; return the
  // last symbol with nonzero mass.
  for (int i = n - 1; i >= 0; --i)
    if (probs[i] > 0.0) return i;
  return n - 1;
}

}  // namespace embedcap
