#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace frobtwist {

/// SplitMix64 generator. Portable and fully specified, so seeded runs agree
/// across compilers and standard libraries.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("SplitMix64::below(0)");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do r = (*this)(); while (r >= limit);
    return r % n;
  }

 private:
  std::uint64_t state_;
};

/// Independent stream for item `position` under a run-level `seed`.
inline SplitMix64 keyed_stream(std::uint64_t seed, std::uint64_t position) {
  SplitMix64 mixer(seed ^ 0x6a09e667f3bcc909ULL);
  std::uint64_t a = mixer();
  SplitMix64 mixer2(a + position * 0x9e3779b97f4a7c15ULL);
  return SplitMix64(mixer2());
}

/// Draws one value with probability proportional to its integer weight.
/// Falls back to a uniform choice when every weight is zero.
template <class Value>
Value sample_weighted(std::span<const std::pair<Value, std::uint64_t>> items, SplitMix64& rng) {
  if (items.empty()) throw std::invalid_argument("sample_weighted: empty support");
  std::uint64_t total = 0;
  for (const auto& [v, w] : items) total += w;
  if (total == 0) return items[rng.below(items.size())].first;
  std::uint64_t r = rng.below(total);
  for (const auto& [v, w] : items) {
    if (r < w) return v;
    r -= w;
  }
  return items.back().first;
}

/// Fisher-Yates shuffle of 0..n-1 driven by SplitMix64(seed).
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

}  // namespace frobtwist
