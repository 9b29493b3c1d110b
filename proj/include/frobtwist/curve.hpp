#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frobtwist/arith.hpp"

namespace frobtwist {

/// Base class of every error the library signals.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadReduction : public Error {
 public:
  using Error::Error;
};

/// The supplied equation disagrees with the record's conductor at some prime.
class ModelMismatch : public Error {
 public:
  using Error::Error;
};

class NonSquarefree : public Error {
 public:
  using Error::Error;
};

class MissingData : public Error {
 public:
  using Error::Error;
};

/// Cached ascending list of the primes below `bound`.
inline const std::vector<std::uint32_t>& prime_list(std::uint32_t bound) {
  static std::mutex mutex;
  static std::map<std::uint32_t, std::unique_ptr<const std::vector<std::uint32_t>>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[bound];
  if (!slot) slot = std::make_unique<const std::vector<std::uint32_t>>(primes_below(bound));
  return *slot;
}

/// Smallest bound B such that exactly `count` primes lie below B.
inline std::uint32_t minimal_bound_for_count(std::size_t count) {
  if (count == 0) return 2;
  std::uint32_t hi = 128;
  while (prime_list(hi).size() < count) hi *= 2;
  const auto& primes = prime_list(hi);
  return primes[count - 1] + 1;
}

/// Bound implied by a bare list of `count` traces: any bound in (p_count, p_{count+1}]
/// fits, and a power of ten in that interval is preferred over the minimal one.
inline std::uint32_t inferred_bound_for_count(std::size_t count) {
  const std::uint32_t lo = minimal_bound_for_count(count);
  std::uint32_t hi = 128;
  while (prime_list(hi).size() <= count) hi *= 2;
  const std::uint32_t next_prime = prime_list(hi)[count];
  for (std::uint64_t b = 10; b <= next_prime; b *= 10)
    if (b >= lo) return static_cast<std::uint32_t>(b);
  return lo;
}

/// Traces a_p aligned to the ascending primes below `bound`.
class TraceTable {
 public:
  TraceTable() = default;

  TraceTable(std::uint32_t bound, std::vector<std::int32_t> values)
      : bound_(bound), values_(std::move(values)) {
    if (bound_ < 2) throw std::invalid_argument("TraceTable: bound must be >= 2");
    if (values_.size() != prime_list(bound_).size())
      throw std::invalid_argument("TraceTable: expected " + std::to_string(prime_list(bound_).size()) +
                                  " values for bound " + std::to_string(bound_) + ", got " +
                                  std::to_string(values_.size()));
  }

  std::uint32_t bound() const noexcept { return bound_; }
  std::span<const std::int32_t> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<std::uint32_t>& primes() const { return prime_list(bound_); }

  bool covers(std::uint32_t p) const noexcept { return p < bound_; }

  /// a_p for a prime p < bound.
  std::int32_t at(std::uint32_t p) const {
    const auto& ps = primes();
    auto it = std::lower_bound(ps.begin(), ps.end(), p);
    if (it == ps.end() || *it != p)
      throw std::out_of_range("TraceTable: " + std::to_string(p) + " is not a tabulated prime");
    return values_[static_cast<std::size_t>(it - ps.begin())];
  }

  /// Entry by position in the prime list; positions 0..24 are the primes below 100.
  std::int32_t operator[](std::size_t index) const { return values_[index]; }

  bool operator==(const TraceTable&) const = default;

 private:
  std::uint32_t bound_ = 2;
  std::vector<std::int32_t> values_;
};

/// Coefficients of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
struct WeierstrassCoeffs {
  BigInt a1, a2, a3, a4, a6;

  std::array<BigInt, 5> as_array() const { return {a1, a2, a3, a4, a6}; }

  BigInt b2() const { return a1 * a1 + 4 * a2; }
  BigInt b4() const { return a1 * a3 + 2 * a4; }
  BigInt b6() const { return a3 * a3 + 4 * a6; }
  BigInt b8() const { return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4; }
  BigInt c4() const { return b2() * b2() - 24 * b4(); }
  BigInt c6() const {
    BigInt B2 = b2();
    return -B2 * B2 * B2 + 36 * B2 * b4() - 216 * b6();
  }
  BigInt discriminant() const {
    BigInt B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
    return -B2 * B2 * B8 - 8 * B4 * B4 * B4 - 27 * B6 * B6 + 9 * B2 * B4 * B6;
  }

  bool operator==(const WeierstrassCoeffs&) const = default;
};

/// One elliptic curve (or isogeny class) as carried through the pipeline.
struct CurveRecord {
  std::optional<std::string> label;
  /// Unknown only for derived curves (e.g. constructed twists).
  std::optional<std::uint64_t> conductor;
  std::optional<WeierstrassCoeffs> ainvs;
  std::optional<TraceTable> traces;
  /// Precomputed twist hash, when the source data carries one.
  std::optional<std::uint64_t> stored_hash;

  std::string display_name() const { return label ? *label : std::string("<unlabelled>"); }

  bool operator==(const CurveRecord&) const = default;
};

inline bool hasse_ok(std::int64_t ap, std::uint32_t p) {
  return ap * ap <= 4 * static_cast<std::int64_t>(p);
}

/// Checks the record-level invariants; returns an empty string when valid.
inline std::string validate(const CurveRecord& curve) {
  if (curve.conductor && *curve.conductor < 1) return "conductor must be >= 1";
  if (!curve.ainvs && !curve.traces && !curve.stored_hash) return "record has neither ainvs nor traces";
  if (curve.ainvs && curve.ainvs->discriminant() == 0) return "singular Weierstrass equation (discriminant 0)";
  if (curve.traces && curve.conductor) {
    const auto& ps = curve.traces->primes();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::int64_t ap = (*curve.traces)[i];
      if (*curve.conductor % ps[i] == 0) {
        if (ap < -1 || ap > 1)
          return "a_" + std::to_string(ps[i]) + " = " + std::to_string(ap) + " at a bad prime is not in {-1,0,1}";
      } else if (!hasse_ok(ap, ps[i])) {
        return "a_" + std::to_string(ps[i]) + " = " + std::to_string(ap) + " violates the Hasse bound";
      }
    }
  }
  return {};
}

}  // namespace frobtwist
