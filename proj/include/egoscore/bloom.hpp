#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace egoscore {

/// 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Seeded hash of an ordered pair of 64-bit values.
std::uint64_t hash_pair(std::uint64_t a, std::uint64_t b, std::uint64_t seed);

/// Bit-array Bloom filter over 64-bit pair keys. Probe i of key x is
/// (h1(x) + i * h2(x)) mod m with h1, h2 two independently seeded hashes.
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(std::size_t bits, int hashes, std::uint64_t salt);

  void insert(std::uint64_t a, std::uint64_t b);
  bool contains(std::uint64_t a, std::uint64_t b) const;

  std::size_t bits() const { return bits_; }
  int hashes() const { return hashes_; }
  std::uint64_t salt() const { return salt_; }

  /// (1 - exp(-k n / m))^k for n inserted keys.
  double expected_false_positive_rate(std::size_t inserted) const;

 private:
  std::size_t bits_ = 0;
  int hashes_ = 1;
  std::uint64_t salt_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace egoscore
