#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace frobtwist {

using BigInt = boost::multiprecision::cpp_int;

/// All primes p with lo <= p < hi, ascending.
inline std::vector<std::uint32_t> primes_in_range(std::uint32_t lo, std::uint32_t hi) {
  std::vector<std::uint32_t> out;
  if (hi <= 2) return out;
  std::vector<bool> composite(hi, false);
  for (std::uint64_t i = 2; i * i < hi; ++i) {
    if (composite[i]) continue;
    for (std::uint64_t j = i * i; j < hi; j += i) composite[j] = true;
  }
  for (std::uint32_t i = lo < 2 ? 2 : lo; i < hi; ++i)
    if (!composite[i]) out.push_back(i);
  return out;
}

inline std::vector<std::uint32_t> primes_below(std::uint32_t bound) {
  return primes_in_range(2, bound);
}

/// The 25 primes below 100.
inline const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = primes_below(100);
  return primes;
}

inline constexpr std::size_t kSmallPrimeCount = 25;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Nonnegative residue of a (possibly huge, possibly negative) integer.
inline std::int64_t reduce_mod(const BigInt& value, std::int64_t p) {
  BigInt r = value % p;
  if (r < 0) r += p;
  return r.convert_to<std::int64_t>();
}

inline std::int64_t reduce_mod(std::int64_t value, std::int64_t p) {
  std::int64_t r = value % p;
  return r < 0 ? r + p : r;
}

inline std::int64_t pow_mod(std::int64_t base, std::uint64_t exp, std::int64_t p) {
  std::int64_t result = 1 % p;
  base = reduce_mod(base, p);
  while (exp) {
    if (exp & 1) result = static_cast<std::int64_t>((__int128)result * base % p);
    base = static_cast<std::int64_t>((__int128)base * base % p);
    exp >>= 1;
  }
  return result;
}

/// Legendre symbol (a|p) for odd prime p, via Euler's criterion.
inline int legendre(std::int64_t a, std::int64_t p) {
  if (p == 2) throw std::invalid_argument("legendre: p must be odd");
  std::int64_t r = pow_mod(a, static_cast<std::uint64_t>((p - 1) / 2), p);
  if (r == 0) return 0;
  return r == 1 ? 1 : -1;
}

inline bool is_squarefree(std::int64_t d) {
  if (d == 0) return false;
  std::uint64_t n = d < 0 ? static_cast<std::uint64_t>(-d) : static_cast<std::uint64_t>(d);
  for (std::uint64_t q = 2; q * q <= n; ++q) {
    if (n % (q * q) == 0) return false;
    if (n % q == 0) n /= q;
  }
  return true;
}

/// Arithmetic modulo the Mersenne prime 2^61 - 1.
namespace mersenne61 {

inline constexpr std::uint64_t kModulus = (std::uint64_t{1} << 61) - 1;

inline constexpr std::uint64_t reduce(unsigned __int128 x) {
  // 2^61 == 1 (mod P), so fold the high bits onto the low bits.
  std::uint64_t lo = static_cast<std::uint64_t>(x & kModulus);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t s = (lo + (hi & kModulus)) + (hi >> 61);
  s = (s & kModulus) + (s >> 61);
  return s >= kModulus ? s - kModulus : s;
}

inline constexpr std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  return s >= kModulus ? s - kModulus : s;
}

inline constexpr std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
  return reduce(static_cast<unsigned __int128>(a) * b);
}

}  // namespace mersenne61

}  // namespace frobtwist
