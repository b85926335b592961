#include "egoscore/bloom.hpp"

#include <cmath>
#include <stdexcept>

namespace egoscore {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_pair(std::uint64_t a, std::uint64_t b, std::uint64_t seed) {
  return mix64(mix64(a ^ mix64(seed)) + 0x632be59bd9b4e019ULL * b);
}

BloomFilter::BloomFilter(std::size_t bits, int hashes, std::uint64_t salt)
    : bits_(bits), hashes_(hashes), salt_(salt), words_((bits + 63) / 64, 0) {
  if (hashes < 1) throw std::invalid_argument("bloom filter needs at least one hash");
}

void BloomFilter::insert(std::uint64_t a, std::uint64_t b) {
  if (bits_ == 0) throw std::logic_error("insert into a zero-size bloom filter");
  const std::uint64_t h1 = hash_pair(a, b, salt_);
  const std::uint64_t h2 = hash_pair(a, b, salt_ ^ 0xa0761d6478bd642fULL) | 1ULL;
  for (int i = 0; i < hashes_; ++i) {
    const std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % bits_;
    words_[bit >> 6] |= 1ULL << (bit & 63);
  }
}

bool BloomFilter::contains(std::uint64_t a, std::uint64_t b) const {
  if (bits_ == 0) return false;
  const std::uint64_t h1 = hash_pair(a, b, salt_);
  const std::uint64_t h2 = hash_pair(a, b, salt_ ^ 0xa0761d6478bd642fULL) | 1ULL;
  for (int i = 0; i < hashes_; ++i) {
    const std::uint64_t bit = (h1 + static_cast<std::uint64_t>(i) * h2) % bits_;
    if (!(words_[bit >> 6] & (1ULL << (bit & 63)))) return false;
  }
  return true;
}

double BloomFilter::expected_false_positive_rate(std::size_t inserted) const {
  if (bits_ == 0) return 0.0;
  const double k = hashes_;
  return std::pow(1.0 - std::exp(-k * static_cast<double>(inserted) / static_cast<double>(bits_)), k);
}

}  // namespace egoscore
