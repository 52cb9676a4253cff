#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace etd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Bad input: unparseable files, out-of-vocabulary references, unusable
/// configuration. CLI maps these to exit status 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (empty sequence, shape
/// mismatch, fingerprint mixing). CLI maps these to exit status 2.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// All stochastic operations draw from Rng, which wraps std::mt19937_64 with
// hand-rolled bounded-int / unit-double / shuffle helpers so that sampled
// sequences depend only on the seed, not on the standard library's
// distribution implementations. Independent streams (per example, per shard)
// are derived with derive_seed(), a splitmix64-based splitter.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from (base, stream, index).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Uniform in {0, ..., n-1}, unbiased (rejection sampling).
  std::size_t below(std::size_t n) {
    if (n == 0) throw ContractError("Rng::below: n must be positive");
    const std::uint64_t span = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = eng_();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % span);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  /// Fisher-Yates; identical results on every platform for a given seed.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Content fingerprints (FNV-1a 64, hex). Used in checkpoints and manifests to
// refuse accidental mixing of artifacts produced under different configs or
// vocabularies.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

/// Fingerprint of a byte string.
std::string fingerprint(std::string_view bytes);

/// Fingerprint of a file's contents.
std::string fingerprint_file(const std::string& path);

// Small shared helpers.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
std::vector<std::string> split_ws(std::string_view line);
bool is_punctuation_token(const std::string& token);

}  // namespace etd
