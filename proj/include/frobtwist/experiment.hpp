#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "frobtwist/data_pipeline.hpp"
#include "frobtwist/metrics.hpp"
#include "frobtwist/sign_matcher.hpp"

namespace frobtwist {

/// Grouping key of a classifier run: exact twist hash, or proxy magnitudes at k primes.
struct KeyMode {
  enum class Kind { TwistHash, Proxy } kind = Kind::TwistHash;
  int k = 8;

  static KeyMode twist_hash() { return {}; }
  static KeyMode proxy(int k) { return {Kind::Proxy, k}; }
  std::string name() const { return kind == Kind::TwistHash ? "twist-hash" : "proxy(k=" + std::to_string(k) + ")"; }
};

/// One row shaped like the per-prime model comparison table.
struct ReportRow {
  std::uint32_t prime = 0;
  std::uint64_t good_count = 0;
  std::uint64_t test_count = 0;
  std::uint64_t probabilistic = 0;
  std::uint64_t correct = 0;
  std::uint64_t deterministic = 0;
  double deterministic_mcc = 0;
  double overall_mcc = 0;
};

/// Aggregates predictions that all target the same prime.
inline ReportRow summarize(std::span<const PredictionRecord> predictions, std::uint64_t good_count) {
  ReportRow row;
  row.good_count = good_count;
  row.test_count = predictions.size();
  std::vector<std::int32_t> truth, pred, det_truth, det_pred;
  for (const auto& p : predictions) {
    if (!p.truth) throw MissingData("summarize: prediction for '" + p.label + "' has no true value");
    if (row.prime == 0) row.prime = p.prime;
    if (p.prime != row.prime) throw std::invalid_argument("summarize: predictions span several primes");
    truth.push_back(*p.truth);
    pred.push_back(p.predicted);
    if (p.deterministic()) {
      det_truth.push_back(*p.truth);
      det_pred.push_back(p.predicted);
    } else {
      ++row.probabilistic;
    }
    row.correct += p.predicted == *p.truth;
  }
  row.deterministic = det_truth.size();
  if (!truth.empty()) row.overall_mcc = mcc(truth, pred);
  if (!det_truth.empty()) row.deterministic_mcc = mcc(det_truth, det_pred);
  return row;
}

struct ExperimentResult {
  std::vector<PredictionRecord> predictions;
  ReportRow report;
  SplitSpec split;
  EmpiricalDistribution train_distribution;
};

/// Shuffles `dataset` (already restricted to good reduction at p), holds out
/// the last test_size curves and predicts them from the rest.
inline ExperimentResult run_experiment(std::span<const CurveRecord> dataset, std::uint32_t p, KeyMode mode,
                                       std::size_t test_size, std::uint64_t seed, MatcherOptions options = {}) {
  if (dataset.size() < test_size + 2)
    throw DatasetTooSmall("run_experiment needs at least " + std::to_string(test_size + 2) + " curves, got " +
                          std::to_string(dataset.size()));
  ExperimentResult result;
  result.split = make_split(dataset.size(), seed, test_size);
  const auto sets = apply_split(dataset, result.split);
  if (mode.kind == KeyMode::Kind::TwistHash) {
    SignMatcher matcher(sets.train, TwistHashKey{}, p, options);
    result.predictions = matcher.predict_all(sets.test, seed);
    result.train_distribution = matcher.distribution();
  } else {
    SignMatcher matcher(sets.train, ProxyKeyFn{mode.k, p}, p, options);
    result.predictions = matcher.predict_all(sets.test, seed);
    result.train_distribution = matcher.distribution();
  }
  result.report = summarize(result.predictions, dataset.size());
  result.report.prime = p;
  return result;
}

}  // namespace frobtwist
