#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "frobtwist/curve.hpp"
#include "frobtwist/random.hpp"

namespace frobtwist {

class EmptyTraining : public Error {
 public:
  using Error::Error;
};

/// Normalized frequency table of a_p over a training set (the fallback P(p)).
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;

  template <class Range>
  static EmpiricalDistribution from_values(const Range& values) {
    std::map<std::int32_t, std::uint64_t> counts;
    for (auto v : values) ++counts[static_cast<std::int32_t>(v)];
    EmpiricalDistribution d;
    for (auto [v, c] : counts) {
      d.items_.emplace_back(v, c);
      d.total_ += c;
    }
    return d;
  }

  bool empty() const { return total_ == 0; }
  std::uint64_t total() const { return total_; }
  std::uint64_t count(std::int32_t v) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), v,
                               [](const auto& item, std::int32_t x) { return item.first < x; });
    return it != items_.end() && it->first == v ? it->second : 0;
  }
  double weight(std::int32_t v) const { return total_ ? static_cast<double>(count(v)) / total_ : 0.0; }
  std::vector<std::int32_t> support() const {
    std::vector<std::int32_t> s;
    for (const auto& [v, c] : items_) s.push_back(v);
    return s;
  }
  std::span<const std::pair<std::int32_t, std::uint64_t>> items() const { return items_; }

  std::int32_t sample(SplitMix64& rng) const {
    if (empty()) throw EmptyTraining("cannot sample from an empty distribution");
    return sample_weighted<std::int32_t>(items_, rng);
  }

 private:
  std::vector<std::pair<std::int32_t, std::uint64_t>> items_;
  std::uint64_t total_ = 0;
};

}  // namespace frobtwist
