#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "frobtwist/arith.hpp"
#include "frobtwist/curve.hpp"
#include "frobtwist/distribution.hpp"
#include "frobtwist/parallel.hpp"
#include "frobtwist/random.hpp"
#include "frobtwist/twist_hash.hpp"

namespace frobtwist {

inline constexpr std::size_t kSignLength = kSmallPrimeCount - 1;

inline int sgn(std::int64_t x) { return (x > 0) - (x < 0); }

/// Position of p among the 25 primes below 100.
inline std::size_t small_prime_index(std::uint32_t p) {
  const auto& ps = small_primes();
  auto it = std::lower_bound(ps.begin(), ps.end(), p);
  if (it == ps.end() || *it != p) throw std::invalid_argument(std::to_string(p) + " is not a prime below 100");
  return static_cast<std::size_t>(it - ps.begin());
}

namespace detail {

/// Ternary vector of length 24 stored as two bit masks: bit i of `nonzero`
/// is set when entry i is nonzero, bit i of `negative` when it is -1.
struct TernaryMasks {
  std::uint32_t nonzero = 0;
  std::uint32_t negative = 0;

  int operator[](std::size_t i) const {
    if (!((nonzero >> i) & 1u)) return 0;
    return ((negative >> i) & 1u) ? -1 : 1;
  }
  std::array<std::int8_t, kSignLength> entries() const {
    std::array<std::int8_t, kSignLength> out{};
    for (std::size_t i = 0; i < kSignLength; ++i) out[i] = static_cast<std::int8_t>((*this)[i]);
    return out;
  }
  std::uint64_t packed() const { return (std::uint64_t{negative} << 32) | nonzero; }
  bool operator==(const TernaryMasks&) const = default;
};

inline TernaryMasks masks_from(std::span<const std::int8_t> entries) {
  if (entries.size() != kSignLength) throw std::invalid_argument("sign vectors have exactly 24 entries");
  TernaryMasks m;
  for (std::size_t i = 0; i < kSignLength; ++i) {
    if (entries[i] != 0) m.nonzero |= 1u << i;
    if (entries[i] < 0) m.negative |= 1u << i;
  }
  return m;
}

}  // namespace detail

/// sgn(a_q) for the 24 primes q < 100 other than the target prime, ascending in q.
class SignVector {
 public:
  SignVector() = default;
  SignVector(std::uint32_t target_prime, std::span<const std::int8_t> entries)
      : target_(target_prime), masks_(detail::masks_from(entries)) {}

  std::uint32_t target_prime() const { return target_; }
  int operator[](std::size_t i) const { return masks_[i]; }
  std::size_t size() const { return kSignLength; }
  std::array<std::int8_t, kSignLength> entries() const { return masks_.entries(); }
  const detail::TernaryMasks& masks() const { return masks_; }
  bool operator==(const SignVector&) const = default;

 private:
  friend SignVector sign_vector(const TraceTable&, std::uint32_t);
  std::uint32_t target_ = 0;
  detail::TernaryMasks masks_;
};

/// Pointwise product of two sign vectors.
class RelativePattern {
 public:
  RelativePattern() = default;
  explicit RelativePattern(detail::TernaryMasks masks) : masks_(masks) {}
  explicit RelativePattern(std::span<const std::int8_t> entries) : masks_(detail::masks_from(entries)) {}

  int operator[](std::size_t i) const { return masks_[i]; }
  std::size_t size() const { return kSignLength; }
  std::array<std::int8_t, kSignLength> entries() const { return masks_.entries(); }
  std::uint64_t packed() const { return masks_.packed(); }
  bool operator==(const RelativePattern&) const = default;

 private:
  detail::TernaryMasks masks_;
};

inline SignVector sign_vector(const TraceTable& traces, std::uint32_t p) {
  const std::size_t skip = small_prime_index(p);
  if (!traces.covers(97)) throw std::invalid_argument("sign_vector: traces must cover all primes below 100");
  SignVector v;
  v.target_ = p;
  std::size_t out = 0;
  for (std::size_t i = 0; i < kSmallPrimeCount; ++i) {
    if (i == skip) continue;
    int s = sgn(traces[i]);
    if (s != 0) v.masks_.nonzero |= 1u << out;
    if (s < 0) v.masks_.negative |= 1u << out;
    ++out;
  }
  return v;
}

inline RelativePattern relative_pattern(const SignVector& u, const SignVector& v) {
  if (u.target_prime() != v.target_prime())
    throw std::invalid_argument("relative_pattern: sign vectors exclude different target primes");
  detail::TernaryMasks m;
  m.nonzero = u.masks().nonzero & v.masks().nonzero;
  m.negative = (u.masks().negative ^ v.masks().negative) & m.nonzero;
  return RelativePattern(m);
}

inline std::int32_t target_trace(const CurveRecord& curve, std::uint32_t p) {
  if (!curve.traces || !curve.traces->covers(p))
    throw MissingData(curve.display_name() + ": no a_" + std::to_string(p) + " available");
  return curve.traces->at(p);
}

inline EmpiricalDistribution empirical_distribution(std::span<const CurveRecord> training, std::uint32_t p) {
  if (training.empty()) throw EmptyTraining("empirical_distribution: empty training set");
  std::vector<std::int32_t> values;
  values.reserve(training.size());
  for (const auto& c : training) values.push_back(target_trace(c, p));
  return EmpiricalDistribution::from_values(values);
}

/// (|a_q|) at the k largest primes below 100 other than p, descending in q.
struct ProxyKey {
  std::array<std::uint8_t, 16> magnitudes{};
  std::uint8_t size = 0;

  bool operator==(const ProxyKey&) const = default;
  std::vector<int> values() const { return {magnitudes.begin(), magnitudes.begin() + size}; }
};

struct ProxyKeyHash {
  std::size_t operator()(const ProxyKey& k) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < k.size; ++i) h = (h ^ k.magnitudes[i]) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h ^ k.size);
  }
};

struct TwistHashHasher {
  std::size_t operator()(const TwistHash& h) const noexcept {
    return std::hash<std::uint64_t>{}(h.value * 0x9e3779b97f4a7c15ULL);
  }
};

inline constexpr int kProxyMinK = 7;
inline constexpr int kProxyMaxK = 16;

/// k may be any value in [1, 16]; the classifier runs use [7, 16].
inline ProxyKey proxy_key(const TraceTable& traces, int k, std::uint32_t p) {
  if (k < 1 || k > kProxyMaxK) throw std::invalid_argument("proxy_key: k must lie in [1, 16]");
  if (!traces.covers(97)) throw std::invalid_argument("proxy_key: traces must cover all primes below 100");
  const std::size_t skip = small_prime_index(p);
  ProxyKey key;
  for (std::size_t i = kSmallPrimeCount; i-- > 0 && key.size < k;) {
    if (i == skip) continue;
    std::int32_t a = traces[i];
    key.magnitudes[key.size++] = static_cast<std::uint8_t>(a < 0 ? -a : a);
  }
  return key;
}

/// Groups curves by their twist hash (exact-hash classifier).
struct TwistHashKey {
  using key_type = TwistHash;
  using hasher = TwistHashHasher;
  key_type operator()(const CurveRecord& c) const { return twist_hash_of_curve(c); }
};

/// Groups curves by the magnitudes of their traces at the largest primes (proxy classifier).
struct ProxyKeyFn {
  using key_type = ProxyKey;
  using hasher = ProxyKeyHash;
  int k = 8;
  std::uint32_t target_prime = 2;
  key_type operator()(const CurveRecord& c) const {
    if (!c.traces) throw MissingData(c.display_name() + ": proxy key needs a trace table");
    return proxy_key(*c.traces, k, target_prime);
  }
};

/// Occurrences of each relative target sign s in {-1, 0, +1}, indexed by s + 1.
struct SignHistogram {
  std::array<std::uint64_t, 3> counts{};
  std::uint64_t of(int s) const { return counts[static_cast<std::size_t>(s + 1)]; }
  std::uint64_t total() const { return counts[0] + counts[1] + counts[2]; }
  bool operator==(const SignHistogram&) const = default;
};

/// The lookup L compressed to relative pattern -> histogram of relative target signs.
class SignIndex {
 public:
  explicit SignIndex(std::uint32_t target_prime = 2) : target_(target_prime) {}

  std::uint32_t target_prime() const { return target_; }

  void insert(const RelativePattern& pattern, int relative_sign, std::uint64_t times = 1) {
    table_[pattern.packed()].counts[static_cast<std::size_t>(relative_sign + 1)] += times;
    total_ += times;
  }

  const SignHistogram* find(const RelativePattern& pattern) const {
    auto it = table_.find(pattern.packed());
    return it == table_.end() ? nullptr : &it->second;
  }

  std::uint64_t total_pairs() const { return total_; }
  std::size_t distinct_patterns() const { return table_.size(); }
  bool empty() const { return total_ == 0; }

  /// Expansion back into (pattern, relative sign, multiplicity) triples, sorted by pattern.
  std::vector<std::tuple<RelativePattern, int, std::uint64_t>> expand() const {
    std::vector<std::pair<std::uint64_t, SignHistogram>> rows(table_.begin(), table_.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::tuple<RelativePattern, int, std::uint64_t>> out;
    for (const auto& [packed, hist] : rows) {
      detail::TernaryMasks m{static_cast<std::uint32_t>(packed), static_cast<std::uint32_t>(packed >> 32)};
      for (int s = -1; s <= 1; ++s)
        if (hist.of(s)) out.emplace_back(RelativePattern(m), s, hist.of(s));
    }
    return out;
  }

 private:
  std::uint32_t target_;
  std::unordered_map<std::uint64_t, SignHistogram> table_;
  std::uint64_t total_ = 0;
};

enum class Provenance { DeterministicVote, TieSampled, ClassDistributionFallback, GlobalFallback };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::DeterministicVote: return "deterministic_vote";
    case Provenance::TieSampled: return "tie_sampled";
    case Provenance::ClassDistributionFallback: return "class_distribution_fallback";
    case Provenance::GlobalFallback: return "global_fallback";
  }
  return "unknown";
}

inline std::optional<Provenance> parse_provenance(std::string_view s) {
  for (auto p : {Provenance::DeterministicVote, Provenance::TieSampled, Provenance::ClassDistributionFallback,
                 Provenance::GlobalFallback})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct PredictionRecord {
  std::string label;
  std::uint32_t prime = 0;
  std::int32_t predicted = 0;
  std::optional<std::int32_t> truth;
  Provenance provenance = Provenance::GlobalFallback;

  bool deterministic() const { return provenance == Provenance::DeterministicVote; }
  bool operator==(const PredictionRecord&) const = default;
};

struct MatcherOptions {
  /// Maximum pairs indexed per key class; 0 means unlimited. Pairs are taken
  /// in (i, j) lexicographic order of training position, so a cap keeps runs
  /// reproducible but drops the information carried by the remaining pairs.
  std::uint64_t pair_cap_per_class = 0;
  unsigned workers = 1;
};

/// Training set prepared for one target prime and one grouping key.
template <class KeyFn>
class TrainingSet {
 public:
  using Key = typename KeyFn::key_type;

  struct Member {
    SignVector signs;
    std::int32_t ap;
  };

  TrainingSet(std::span<const CurveRecord> training, KeyFn key_fn, std::uint32_t p)
      : key_fn_(std::move(key_fn)), target_(p) {
    if (training.empty()) throw EmptyTraining("training set is empty");
    members_.reserve(training.size());
    for (std::size_t i = 0; i < training.size(); ++i) {
      const auto& c = training[i];
      if (!c.traces) throw MissingData(c.display_name() + ": training curve has no trace table");
      members_.push_back({sign_vector(*c.traces, p), target_trace(c, p)});
      classes_[key_fn_(c)].push_back(i);
    }
  }

  const KeyFn& key_fn() const { return key_fn_; }
  std::uint32_t target_prime() const { return target_; }
  std::size_t size() const { return members_.size(); }
  const Member& member(std::size_t i) const { return members_[i]; }

  /// Training positions sharing `key`, in training order; null when unseen.
  const std::vector<std::size_t>* class_of(const Key& key) const {
    auto it = classes_.find(key);
    return it == classes_.end() ? nullptr : &it->second;
  }

  const auto& classes() const { return classes_; }

 private:
  KeyFn key_fn_;
  std::uint32_t target_;
  std::vector<Member> members_;
  std::unordered_map<Key, std::vector<std::size_t>, typename KeyFn::hasher> classes_;
};

/// Indexes every unordered pair of distinct training curves sharing a key.
template <class KeyFn>
SignIndex build_index(const TrainingSet<KeyFn>& training, const MatcherOptions& options = {}) {
  SignIndex index(training.target_prime());
  for (const auto& [key, members] : training.classes()) {
    std::uint64_t taken = 0;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (options.pair_cap_per_class && taken == options.pair_cap_per_class) break;
        const auto& e1 = training.member(members[a]);
        const auto& e2 = training.member(members[b]);
        index.insert(relative_pattern(e1.signs, e2.signs), sgn(e1.ap) * sgn(e2.ap));
        ++taken;
      }
      if (options.pair_cap_per_class && taken == options.pair_cap_per_class) break;
    }
  }
  return index;
}

template <class KeyFn>
SignIndex build_index(std::span<const CurveRecord> training, KeyFn key_fn, std::uint32_t p,
                      const MatcherOptions& options = {}) {
  return build_index(TrainingSet<KeyFn>(training, std::move(key_fn), p), options);
}

/// Vote aggregation and fallbacks for a single test curve. `position` keys the
/// random stream, so predictions do not depend on evaluation order.
template <class KeyFn>
PredictionRecord predict(const CurveRecord& test_curve, const TrainingSet<KeyFn>& training, const SignIndex& index,
                         const EmpiricalDistribution& dist, std::uint64_t seed, std::uint64_t position) {
  const std::uint32_t p = training.target_prime();
  if (index.target_prime() != p) throw std::invalid_argument("predict: index built for a different prime");
  PredictionRecord rec;
  rec.label = test_curve.label.value_or("");
  rec.prime = p;
  if (test_curve.traces && test_curve.traces->covers(p)) rec.truth = test_curve.traces->at(p);

  const auto* members = training.class_of(training.key_fn()(test_curve));
  if (!members) {
    auto rng = keyed_stream(seed, position);
    rec.predicted = dist.sample(rng);
    rec.provenance = Provenance::GlobalFallback;
    return rec;
  }

  if (!test_curve.traces) throw MissingData(test_curve.display_name() + ": test curve has no trace table");
  const SignVector test_signs = sign_vector(*test_curve.traces, p);
  std::map<std::int32_t, std::uint64_t> votes;
  for (std::size_t m : *members) {
    const auto& train = training.member(m);
    const SignHistogram* hist = index.find(relative_pattern(test_signs, train.signs));
    if (!hist) continue;
    for (int s = -1; s <= 1; ++s)
      if (hist->of(s)) votes[s * train.ap] += hist->of(s);
  }

  if (votes.empty()) {
    std::vector<std::int32_t> class_values;
    class_values.reserve(members->size());
    for (std::size_t m : *members) class_values.push_back(training.member(m).ap);
    auto rng = keyed_stream(seed, position);
    rec.predicted = EmpiricalDistribution::from_values(class_values).sample(rng);
    rec.provenance = Provenance::ClassDistributionFallback;
    return rec;
  }

  std::uint64_t best = 0;
  for (const auto& [v, c] : votes) best = std::max(best, c);
  std::vector<std::pair<std::int32_t, std::uint64_t>> tied;
  for (const auto& [v, c] : votes)
    if (c == best) tied.emplace_back(v, dist.count(v));

  if (tied.size() == 1) {
    rec.predicted = tied.front().first;
    rec.provenance = Provenance::DeterministicVote;
    return rec;
  }
  auto rng = keyed_stream(seed, position);
  rec.predicted = sample_weighted<std::int32_t>(tied, rng);
  rec.provenance = Provenance::TieSampled;
  return rec;
}

/// Training distribution, grouped training set and sign index for one prime.
template <class KeyFn>
class SignMatcher {
 public:
  SignMatcher(std::span<const CurveRecord> training, KeyFn key_fn, std::uint32_t p, MatcherOptions options = {})
      : options_(options),
        dist_(empirical_distribution(training, p)),
        training_(training, std::move(key_fn), p),
        index_(build_index(training_, options_)) {}

  PredictionRecord predict_one(const CurveRecord& test_curve, std::uint64_t seed, std::uint64_t position) const {
    return predict(test_curve, training_, index_, dist_, seed, position);
  }

  std::vector<PredictionRecord> predict_all(std::span<const CurveRecord> test, std::uint64_t seed) const {
    std::vector<PredictionRecord> out(test.size());
    parallel_for(test.size(), options_.workers, [&](std::size_t i) { out[i] = predict_one(test[i], seed, i); });
    return out;
  }

  const SignIndex& index() const { return index_; }
  const EmpiricalDistribution& distribution() const { return dist_; }
  const TrainingSet<KeyFn>& training() const { return training_; }

 private:
  MatcherOptions options_;
  EmpiricalDistribution dist_;
  TrainingSet<KeyFn> training_;
  SignIndex index_;
};

}  // namespace frobtwist
