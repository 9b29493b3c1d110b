#include <gtest/gtest.h>

#include "frobtwist/arith.hpp"
#include "frobtwist/random.hpp"

using namespace frobtwist;

TEST(Primes, SmallPrimes) {
  EXPECT_EQ(small_primes().size(), kSmallPrimeCount);
  EXPECT_EQ(small_primes().front(), 2u);
  EXPECT_EQ(small_primes().back(), 97u);
  EXPECT_EQ(primes_below(10000).size(), 1229u);
}

TEST(Primes, SieveAgreesWithTrialDivision) {
  auto trial = [](std::uint32_t n) {
    if (n < 2) return false;
    for (std::uint32_t d = 2; d * d <= n; ++d)
      if (n % d == 0) return false;
    return true;
  };
  for (std::uint32_t n = 0; n < 9000; ++n) ASSERT_EQ(is_prime(n), trial(n)) << n;
  const auto r = primes_in_range(4097, 8192);
  for (auto p : r) ASSERT_TRUE(trial(p));
}

TEST(Legendre, EulerCriterion) {
  for (std::int64_t p : {3, 5, 7, 11, 13, 97, 8191}) {
    for (std::int64_t a = 0; a < std::min<std::int64_t>(p, 300); ++a) {
      std::int64_t e = pow_mod(a, static_cast<std::uint64_t>((p - 1) / 2), p);
      int expected = a == 0 ? 0 : (e == 1 ? 1 : -1);
      ASSERT_EQ(legendre(a, p), expected) << a << " mod " << p;
    }
  }
  EXPECT_EQ(legendre(-1, 5), 1);
  EXPECT_EQ(legendre(-1, 7), -1);
}

TEST(Squarefree, Basic) {
  EXPECT_FALSE(is_squarefree(0));
  EXPECT_TRUE(is_squarefree(-1));
  EXPECT_TRUE(is_squarefree(10));
  EXPECT_FALSE(is_squarefree(-12));
  EXPECT_FALSE(is_squarefree(9));
}

TEST(Mersenne61, ReduceMatchesBigInt) {
  SplitMix64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t a = rng() % mersenne61::kModulus, b = rng() % mersenne61::kModulus;
    BigInt expected = (BigInt(a) * b) % mersenne61::kModulus;
    ASSERT_EQ(BigInt(mersenne61::mul(a, b)), expected);
    ASSERT_EQ(BigInt(mersenne61::add(a, b)), (BigInt(a) + b) % mersenne61::kModulus);
  }
}

TEST(Random, KeyedStreamsAreIndependentOfOrder) {
  auto a = keyed_stream(5, 10);
  auto b = keyed_stream(5, 10);
  auto c = keyed_stream(5, 11);
  EXPECT_EQ(a(), b());
  EXPECT_NE(keyed_stream(5, 10)(), c());
}

TEST(Random, PermutationIsDeterministicAndComplete) {
  auto p = seeded_permutation(100, 3);
  EXPECT_EQ(p, seeded_permutation(100, 3));
  EXPECT_NE(p, seeded_permutation(100, 4));
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Random, WeightedSamplingFrequencies) {
  std::vector<std::pair<int, std::uint64_t>> items{{-1, 1}, {0, 0}, {5, 3}};
  SplitMix64 rng(11);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 40000; ++i) {
    int v = sample_weighted<int>(items, rng);
    counts[v == -1 ? 0 : v == 0 ? 1 : 2]++;
  }
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[0] / 40000.0, 0.25, 0.01);
}

TEST(Random, ZeroWeightsSampleUniformly) {
  std::vector<std::pair<int, std::uint64_t>> items{{1, 0}, {2, 0}};
  SplitMix64 rng(2);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += sample_weighted<int>(items, rng) == 1;
  EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}
