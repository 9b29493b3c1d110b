#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "frobtwist/distribution.hpp"
#include "frobtwist/parallel.hpp"
#include "frobtwist/random.hpp"

namespace frobtwist {

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
}

inline long double choose2(std::uint64_t n) {
  return n < 2 ? 0.0L : static_cast<long double>(n) * static_cast<long double>(n - 1) / 2.0L;
}

}  // namespace detail

/// counts[k * size + l] = items of true class k predicted as l.
template <class Label>
struct ConfusionMatrix {
  std::vector<Label> classes;
  std::vector<std::uint64_t> counts;

  std::size_t size() const { return classes.size(); }
  std::uint64_t at(std::size_t k, std::size_t l) const { return counts[k * size() + l]; }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
  std::uint64_t row_sum(std::size_t k) const {
    std::uint64_t t = 0;
    for (std::size_t l = 0; l < size(); ++l) t += at(k, l);
    return t;
  }
  std::uint64_t col_sum(std::size_t l) const {
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < size(); ++k) t += at(k, l);
    return t;
  }
};

/// Class list is the sorted union of observed labels.
template <class Label>
ConfusionMatrix<Label> confusion_matrix(std::span<const Label> y_true, std::span<const Label> y_pred) {
  detail::require_same_length(y_true.size(), y_pred.size(), "confusion_matrix");
  if (y_true.empty()) throw std::invalid_argument("confusion_matrix: empty input");
  ConfusionMatrix<Label> cm;
  cm.classes.assign(y_true.begin(), y_true.end());
  cm.classes.insert(cm.classes.end(), y_pred.begin(), y_pred.end());
  std::sort(cm.classes.begin(), cm.classes.end());
  cm.classes.erase(std::unique(cm.classes.begin(), cm.classes.end()), cm.classes.end());
  const std::size_t k = cm.classes.size();
  cm.counts.assign(k * k, 0);
  auto pos = [&](const Label& v) {
    return static_cast<std::size_t>(std::lower_bound(cm.classes.begin(), cm.classes.end(), v) - cm.classes.begin());
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.counts[pos(y_true[i]) * k + pos(y_pred[i])];
  return cm;
}

template <class Label>
ConfusionMatrix<Label> confusion_matrix(const std::vector<Label>& y_true, const std::vector<Label>& y_pred) {
  return confusion_matrix<Label>(std::span<const Label>(y_true), std::span<const Label>(y_pred));
}

inline double mcc_binary(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
  const long double num = static_cast<long double>(tp) * tn - static_cast<long double>(fp) * fn;
  const long double d1 = static_cast<long double>(tp + fp) * (tp + fn);
  const long double d2 = static_cast<long double>(tn + fp) * (tn + fn);
  if (d1 == 0 || d2 == 0) return 0.0;
  return static_cast<double>(num / (std::sqrt(d1) * std::sqrt(d2)));
}

/// Second class is the positive one; MCC is symmetric in that choice anyway.
template <class Label>
double mcc_binary(const ConfusionMatrix<Label>& cm) {
  if (cm.size() != 2) throw std::invalid_argument("mcc_binary: expected a 2x2 confusion matrix");
  return mcc_binary(cm.at(1, 1), cm.at(0, 0), cm.at(0, 1), cm.at(1, 0));
}

/// Gorodkin's multiclass MCC, evaluated through row and column sums:
/// numerator N tr(C) - sum_k t_k p_k, denominator
/// sqrt(sum_k t_k (N - t_k)) sqrt(sum_k p_k (N - p_k)). Zero denominators give 0.
template <class Label>
double mcc_multiclass(const ConfusionMatrix<Label>& cm) {
  const std::size_t k = cm.size();
  const auto n = static_cast<long double>(cm.total());
  long double trace = 0, tp_sum = 0, dt = 0, dp = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto t = static_cast<long double>(cm.row_sum(i));
    const auto p = static_cast<long double>(cm.col_sum(i));
    trace += static_cast<long double>(cm.at(i, i));
    tp_sum += t * p;
    dt += t * (n - t);
    dp += p * (n - p);
  }
  if (dt == 0 || dp == 0) return 0.0;
  return static_cast<double>((n * trace - tp_sum) / (std::sqrt(dt) * std::sqrt(dp)));
}

template <class Label>
double mcc(std::span<const Label> y_true, std::span<const Label> y_pred) {
  return mcc_multiclass(confusion_matrix(y_true, y_pred));
}

template <class Label>
double mcc(const std::vector<Label>& y_true, const std::vector<Label>& y_pred) {
  return mcc<Label>(std::span<const Label>(y_true), std::span<const Label>(y_pred));
}

/// Contingency table of two labelings of the same items.
struct Contingency {
  struct Cell {
    std::size_t row, col;
    std::uint64_t count;
  };
  std::vector<Cell> cells;              // nonzero n_ij
  std::vector<std::uint64_t> row_sums;  // a_i
  std::vector<std::uint64_t> col_sums;  // b_j
  std::uint64_t n = 0;
  bool identical_groupings = false;
};

template <class A, class B>
Contingency contingency(std::span<const A> a, std::span<const B> b) {
  detail::require_same_length(a.size(), b.size(), "contingency");
  std::map<A, std::size_t> rows;
  std::map<B, std::size_t> cols;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> cells;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto r = rows.try_emplace(a[i], rows.size()).first->second;
    auto c = cols.try_emplace(b[i], cols.size()).first->second;
    ++cells[{r, c}];
  }
  Contingency t;
  t.n = a.size();
  t.row_sums.assign(rows.size(), 0);
  t.col_sums.assign(cols.size(), 0);
  std::vector<std::size_t> row_cells(rows.size(), 0), col_cells(cols.size(), 0);
  for (const auto& [rc, count] : cells) {
    t.cells.push_back({rc.first, rc.second, count});
    t.row_sums[rc.first] += count;
    t.col_sums[rc.second] += count;
    ++row_cells[rc.first];
    ++col_cells[rc.second];
  }
  t.identical_groupings = rows.size() == cols.size() &&
                          std::all_of(row_cells.begin(), row_cells.end(), [](auto c) { return c == 1; }) &&
                          std::all_of(col_cells.begin(), col_cells.end(), [](auto c) { return c == 1; });
  return t;
}

/// Hubert-Arabie adjusted Rand index. When the denominator vanishes (both
/// partitions trivial) the result is 1 for identical groupings, else 0.
template <class A, class B>
double ari(std::span<const A> a, std::span<const B> b) {
  if (a.size() < 2) throw std::invalid_argument("ari: needs at least two items");
  const Contingency t = contingency(a, b);
  long double index = 0, sum_a = 0, sum_b = 0;
  for (const auto& c : t.cells) index += detail::choose2(c.count);
  for (auto r : t.row_sums) sum_a += detail::choose2(r);
  for (auto c : t.col_sums) sum_b += detail::choose2(c);
  const long double expected = sum_a * sum_b / detail::choose2(t.n);
  const long double max_index = (sum_a + sum_b) / 2;
  const long double denom = max_index - expected;
  if (std::abs(denom) <= 1e-12L * std::max(1.0L, max_index)) return t.identical_groupings ? 1.0 : 0.0;
  return static_cast<double>((index - expected) / denom);
}

template <class A, class B>
double ari(const std::vector<A>& a, const std::vector<B>& b) {
  return ari<A, B>(std::span<const A>(a), std::span<const B>(b));
}

struct EntropyScores {
  double homogeneity = 1;
  double completeness = 1;
  double v_measure = 1;
};

struct ClusterScores {
  double ari = 0;
  double homogeneity = 0;
  double completeness = 0;
  double v_measure = 0;
};

/// Homogeneity, completeness and V-measure with natural-log entropies.
template <class A, class B>
EntropyScores entropy_scores(std::span<const A> truth, std::span<const B> pred) {
  const Contingency t = contingency(truth, pred);
  EntropyScores s;
  if (t.n == 0) return s;
  const auto n = static_cast<long double>(t.n);
  auto entropy = [&](const std::vector<std::uint64_t>& sums) {
    long double h = 0;
    for (auto v : sums)
      if (v) h -= (v / n) * std::log(v / n);
    return h;
  };
  const long double h_c = entropy(t.row_sums), h_k = entropy(t.col_sums);
  long double h_c_given_k = 0, h_k_given_c = 0;
  for (const auto& c : t.cells) {
    const long double nij = static_cast<long double>(c.count);
    h_c_given_k -= (nij / n) * std::log(nij / t.col_sums[c.col]);
    h_k_given_c -= (nij / n) * std::log(nij / t.row_sums[c.row]);
  }
  s.homogeneity = h_c == 0 ? 1.0 : static_cast<double>(std::clamp(1 - h_c_given_k / h_c, 0.0L, 1.0L));
  s.completeness = h_k == 0 ? 1.0 : static_cast<double>(std::clamp(1 - h_k_given_c / h_k, 0.0L, 1.0L));
  const double sum = s.homogeneity + s.completeness;
  s.v_measure = sum == 0 ? 0.0 : 2 * s.homogeneity * s.completeness / sum;
  return s;
}

template <class A, class B>
EntropyScores entropy_scores(const std::vector<A>& truth, const std::vector<B>& pred) {
  return entropy_scores<A, B>(std::span<const A>(truth), std::span<const B>(pred));
}

template <class A, class B>
ClusterScores cluster_scores(std::span<const A> truth, std::span<const B> pred) {
  auto e = entropy_scores(truth, pred);
  return {ari(truth, pred), e.homogeneity, e.completeness, e.v_measure};
}

/// Both labelings restricted to items whose truth class has at least two members.
template <class A, class B>
std::pair<std::vector<A>, std::vector<B>> restrict_multi_instance(std::span<const A> truth, std::span<const B> pred) {
  detail::require_same_length(truth.size(), pred.size(), "restrict_multi_instance");
  std::map<A, std::size_t> sizes;
  for (const auto& t : truth) ++sizes[t];
  std::pair<std::vector<A>, std::vector<B>> out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (sizes[truth[i]] < 2) continue;
    out.first.push_back(truth[i]);
    out.second.push_back(pred[i]);
  }
  return out;
}

template <class A, class B>
std::pair<std::vector<A>, std::vector<B>> restrict_multi_instance(const std::vector<A>& truth,
                                                                  const std::vector<B>& pred) {
  return restrict_multi_instance<A, B>(std::span<const A>(truth), std::span<const B>(pred));
}

struct ErrorStats {
  double mae = 0;
  double rmse = 0;
};

template <class T>
ErrorStats error_stats(std::span<const T> y_true, std::span<const T> y_pred) {
  detail::require_same_length(y_true.size(), y_pred.size(), "error_stats");
  if (y_true.empty()) throw std::invalid_argument("error_stats: empty input");
  long double abs_sum = 0, sq_sum = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const long double d = static_cast<long double>(y_true[i]) - static_cast<long double>(y_pred[i]);
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const auto n = static_cast<long double>(y_true.size());
  return {static_cast<double>(abs_sum / n), static_cast<double>(std::sqrt(sq_sum / n))};
}

template <class T>
ErrorStats error_stats(const std::vector<T>& y_true, const std::vector<T>& y_pred) {
  return error_stats<T>(std::span<const T>(y_true), std::span<const T>(y_pred));
}

template <class T>
double disagreement(std::span<const T> pred_a, std::span<const T> pred_b) {
  detail::require_same_length(pred_a.size(), pred_b.size(), "disagreement");
  if (pred_a.empty()) throw std::invalid_argument("disagreement: empty input");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < pred_a.size(); ++i) diff += pred_a[i] != pred_b[i];
  return static_cast<double>(diff) / static_cast<double>(pred_a.size());
}

template <class T>
double disagreement(const std::vector<T>& a, const std::vector<T>& b) {
  return disagreement<T>(std::span<const T>(a), std::span<const T>(b));
}

/// Per-item agreement tally of two models against the truth.
struct OutcomeBreakdown {
  std::uint64_t both_correct = 0;
  std::uint64_t a_only_correct = 0;
  std::uint64_t b_only_correct = 0;
  std::uint64_t both_wrong = 0;
  double disagreement = 0;
};

template <class T>
OutcomeBreakdown outcome_breakdown(std::span<const T> truth, std::span<const T> pred_a, std::span<const T> pred_b) {
  detail::require_same_length(truth.size(), pred_a.size(), "outcome_breakdown");
  detail::require_same_length(truth.size(), pred_b.size(), "outcome_breakdown");
  OutcomeBreakdown o;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool a = pred_a[i] == truth[i], b = pred_b[i] == truth[i];
    if (a && b) ++o.both_correct;
    else if (a) ++o.a_only_correct;
    else if (b) ++o.b_only_correct;
    else ++o.both_wrong;
  }
  o.disagreement = disagreement(pred_a, pred_b);
  return o;
}

inline std::int64_t nonnegative_residue(std::int64_t v, std::int64_t m) {
  std::int64_t r = v % m;
  return r < 0 ? r + m : r;
}

/// Multiclass MCC after reducing both sequences to residues in [0, m).
template <class T>
double mod_reduce_eval(std::span<const T> y_true, std::span<const T> y_pred, std::int64_t m) {
  detail::require_same_length(y_true.size(), y_pred.size(), "mod_reduce_eval");
  if (m < 1) throw std::invalid_argument("mod_reduce_eval: modulus must be positive");
  std::vector<std::int64_t> t(y_true.size()), p(y_pred.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = nonnegative_residue(static_cast<std::int64_t>(y_true[i]), m);
    p[i] = nonnegative_residue(static_cast<std::int64_t>(y_pred[i]), m);
  }
  return mcc<std::int64_t>(t, p);
}

template <class T>
double mod_reduce_eval(const std::vector<T>& y_true, const std::vector<T>& y_pred, std::int64_t m) {
  return mod_reduce_eval<T>(std::span<const T>(y_true), std::span<const T>(y_pred), m);
}

struct Significance {
  double observed = 0;
  double null_mean = 0;
  double p_value = 1;
  std::uint64_t exceedances = 0;
  std::uint64_t draws = 0;
};

/// Plus-one Monte Carlo p-value: (1 + #{null >= observed}) / (draws + 1).
inline double plus_one_p_value(std::uint64_t exceedances, std::uint64_t draws) {
  return static_cast<double>(exceedances + 1) / static_cast<double>(draws + 1);
}

/// The null predictor for draw d samples every prediction i.i.d. from
/// `train_dist` using keyed_stream(seed, d).
inline std::vector<std::int32_t> null_draw(std::size_t n, const EmpiricalDistribution& train_dist, std::uint64_t seed,
                                           std::uint64_t draw) {
  auto rng = keyed_stream(seed, draw);
  std::vector<std::int32_t> out(n);
  for (auto& v : out) v = train_dist.sample(rng);
  return out;
}

/// Training-marginal null test of an observed exact-value MCC.
inline Significance null_significance(std::span<const std::int32_t> y_true, double observed_mcc,
                                      const EmpiricalDistribution& train_dist, std::uint64_t draws, std::uint64_t seed,
                                      unsigned workers = 1) {
  if (draws < 1) throw std::invalid_argument("null_significance: draws must be >= 1");
  std::vector<double> null_mcc(draws);
  parallel_for(draws, workers, [&](std::size_t d) {
    auto pred = null_draw(y_true.size(), train_dist, seed, d);
    null_mcc[d] = mcc<std::int32_t>(y_true, std::span<const std::int32_t>(pred));
  });
  Significance s;
  s.observed = observed_mcc;
  s.draws = draws;
  long double sum = 0;
  for (double v : null_mcc) {
    sum += v;
    if (v >= observed_mcc) ++s.exceedances;
  }
  s.null_mean = static_cast<double>(sum / draws);
  s.p_value = plus_one_p_value(s.exceedances, draws);
  return s;
}

/// One row per evaluation task: exact value, then residues mod 2, 3 and 4.
struct SignificanceRow {
  std::string task;
  std::int64_t modulus = 0;  // 0 for exact value
  Significance result;
};

/// Observed-vs-null table for exact, mod 2, mod 3 and mod 4 tasks. Each null
/// draw is shared across tasks and reduced per modulus.
inline std::vector<SignificanceRow> significance_table(std::span<const std::int32_t> y_true,
                                                       std::span<const std::int32_t> y_pred,
                                                       const EmpiricalDistribution& train_dist, std::uint64_t draws,
                                                       std::uint64_t seed, unsigned workers = 1) {
  detail::require_same_length(y_true.size(), y_pred.size(), "significance_table");
  if (draws < 1) throw std::invalid_argument("significance_table: draws must be >= 1");
  const std::vector<std::int64_t> moduli{0, 2, 3, 4};
  auto score = [&](std::span<const std::int32_t> pred, std::int64_t m) {
    return m == 0 ? mcc<std::int32_t>(y_true, pred) : mod_reduce_eval<std::int32_t>(y_true, pred, m);
  };
  std::vector<std::vector<double>> null_mcc(moduli.size(), std::vector<double>(draws));
  parallel_for(draws, workers, [&](std::size_t d) {
    auto pred = null_draw(y_true.size(), train_dist, seed, d);
    for (std::size_t t = 0; t < moduli.size(); ++t) null_mcc[t][d] = score(pred, moduli[t]);
  });
  std::vector<SignificanceRow> rows;
  for (std::size_t t = 0; t < moduli.size(); ++t) {
    SignificanceRow row;
    row.modulus = moduli[t];
    row.task = moduli[t] == 0 ? "exact" : "mod" + std::to_string(moduli[t]);
    row.result.observed = score(y_pred, moduli[t]);
    row.result.draws = draws;
    long double sum = 0;
    for (double v : null_mcc[t]) {
      sum += v;
      if (v >= row.result.observed) ++row.result.exceedances;
    }
    row.result.null_mean = static_cast<double>(sum / draws);
    row.result.p_value = plus_one_p_value(row.result.exceedances, draws);
    rows.push_back(row);
  }
  return rows;
}

/// Table of proximity statistics between two per-prime MCC curves;
/// differences are taken as proxy - twist.
struct Proximity {
  double mae = 0;
  double rmse = 0;
  double max_diff = 0;
  double mean_diff = 0;
};

inline Proximity proxy_proximity_report(std::span<const double> per_prime_mcc_twist,
                                        std::span<const double> per_prime_mcc_proxy) {
  detail::require_same_length(per_prime_mcc_twist.size(), per_prime_mcc_proxy.size(), "proxy_proximity_report");
  if (per_prime_mcc_twist.empty()) throw std::invalid_argument("proxy_proximity_report: empty input");
  Proximity r;
  long double abs_sum = 0, sq_sum = 0, sum = 0;
  for (std::size_t i = 0; i < per_prime_mcc_twist.size(); ++i) {
    const long double d = static_cast<long double>(per_prime_mcc_proxy[i]) - per_prime_mcc_twist[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
    sum += d;
    r.max_diff = std::max(r.max_diff, static_cast<double>(std::abs(d)));
  }
  const auto n = static_cast<long double>(per_prime_mcc_twist.size());
  r.mae = static_cast<double>(abs_sum / n);
  r.rmse = static_cast<double>(std::sqrt(sq_sum / n));
  r.mean_diff = static_cast<double>(sum / n);
  return r;
}

}  // namespace frobtwist
