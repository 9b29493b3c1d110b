#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "frobtwist/ap_engine.hpp"
#include "frobtwist/arith.hpp"
#include "frobtwist/curve.hpp"
#include "frobtwist/detail/pi_digits.hpp"

namespace frobtwist {

class InsufficientPrecision : public Error {
 public:
  using Error::Error;
};

class IncompleteTable : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint64_t kHashModulus = mersenne61::kModulus;
inline constexpr std::uint32_t kHashRangeLow = 1u << 12;
inline constexpr std::uint32_t kHashRangeHigh = 1u << 13;

/// 61-bit residue identifying a quadratic twist class.
struct TwistHash {
  std::uint64_t value = 0;
  auto operator<=>(const TwistHash&) const = default;
};

/// Decimal digits of pi required to extract n base-(2^61-1) digits safely.
inline std::size_t decimal_digits_required(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(18.4 * static_cast<double>(n + 2)));
}

/// First n base-P digits of the fractional part of pi: digit i = floor(pi * P^i) mod P.
inline std::vector<std::uint64_t> pi_digits_base_P(std::size_t n,
                                                   std::string_view fraction_digits = detail::kPiFractionDigits) {
  if (fraction_digits.size() < decimal_digits_required(n))
    throw InsufficientPrecision("pi constant carries " + std::to_string(fraction_digits.size()) +
                                " decimals; " + std::to_string(decimal_digits_required(n)) + " needed for " +
                                std::to_string(n) + " base-P digits");
  BigInt frac{std::string(fraction_digits)};
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(fraction_digits.size()));
  std::vector<std::uint64_t> digits;
  digits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    frac *= kHashModulus;
    BigInt d = frac / scale;
    frac -= d * scale;
    digits.push_back(d.convert_to<std::uint64_t>());
  }
  return digits;
}

struct HashCoefficients {
  std::uint64_t modulus = kHashModulus;
  /// Primes in (2^12, 2^13), ascending; e_p is the 1-based position.
  std::vector<std::uint32_t> primes;
  /// c_p mod P, aligned with `primes`.
  std::vector<std::uint64_t> coeffs;
  /// Position of primes.front() in the list of all primes.
  std::size_t first_prime_index = 0;
};

/// Computed once per process and shared read-only afterwards.
inline const HashCoefficients& hash_coefficients() {
  static const HashCoefficients coefficients = [] {
    HashCoefficients h;
    h.primes = primes_in_range(kHashRangeLow + 1, kHashRangeHigh);
    h.coeffs = pi_digits_base_P(h.primes.size());
    h.first_prime_index = primes_below(kHashRangeLow + 1).size();
    return h;
  }();
  return coefficients;
}

/// h = sum c_p |a_p| mod P over primes 2^12 < p < 2^13.
inline TwistHash twist_hash(const TraceTable& traces) {
  const auto& h = hash_coefficients();
  if (traces.bound() < h.primes.back() + 1)
    throw IncompleteTable("twist_hash needs traces for all primes below 8192 (table bound " +
                          std::to_string(traces.bound()) + ")");
  unsigned __int128 acc = 0;
  for (std::size_t i = 0; i < h.primes.size(); ++i) {
    std::int64_t ap = traces[h.first_prime_index + i];
    acc += static_cast<unsigned __int128>(h.coeffs[i]) * static_cast<std::uint64_t>(ap < 0 ? -ap : ap);
  }
  return TwistHash{mersenne61::reduce(acc)};
}

/// Prefers a stored hash, then a stored table of sufficient bound, then the equation.
inline TwistHash twist_hash_of_curve(const CurveRecord& curve) {
  if (curve.stored_hash) return TwistHash{*curve.stored_hash};
  if (curve.traces && curve.traces->bound() >= kHashRangeHigh) return twist_hash(*curve.traces);
  if (curve.ainvs) return twist_hash(build_trace_table(curve, kHashRangeHigh));
  throw MissingData(curve.display_name() + ": no stored hash, no trace table to 8192 and no equation");
}

}  // namespace frobtwist
