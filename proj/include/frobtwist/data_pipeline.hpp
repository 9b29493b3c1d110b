#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "frobtwist/ap_engine.hpp"
#include "frobtwist/curve.hpp"
#include "frobtwist/io.hpp"
#include "frobtwist/metrics.hpp"
#include "frobtwist/parallel.hpp"
#include "frobtwist/random.hpp"
#include "frobtwist/twist_hash.hpp"

namespace frobtwist {

class DatasetTooSmall : public Error {
 public:
  using Error::Error;
};

class OrderingViolation : public Error {
 public:
  using Error::Error;
};

struct IngestOptions {
  /// Build a trace table up to the manifest bound for records that carry only ainvs.
  bool build_missing_traces = true;
};

/// Reads and validates a JSONL record stream. Blank lines and lines starting
/// with '#' are skipped.
inline std::vector<CurveRecord> ingest(std::istream& in, const std::string& source,
                                       const std::optional<DatasetManifest>& manifest, IngestOptions options = {}) {
  std::vector<CurveRecord> records;
  const std::optional<std::uint32_t> bound =
      manifest ? std::optional<std::uint32_t>(manifest->prime_bound) : std::nullopt;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    CurveRecord rec;
    try {
      rec = parse_record(line, bound);
    } catch (const std::exception& e) {
      throw DataError(source, n, e.what());
    }
    if (!rec.conductor) throw DataError(source, n, rec.display_name() + ": missing conductor");
    if (std::string problem = validate(rec); !problem.empty())
      throw DataError(source, n, rec.display_name() + ": " + problem);
    if (!rec.traces && rec.ainvs && options.build_missing_traces) {
      try {
        rec.traces = build_trace_table(rec, bound.value_or(100));
      } catch (const Error& e) {
        throw DataError(source, n, e.what());
      }
    }
    records.push_back(std::move(rec));
  }
  if (manifest && manifest->record_count && *manifest->record_count != records.size())
    throw DataError(source, 0, "manifest declares " + std::to_string(*manifest->record_count) + " records, file has " +
                                   std::to_string(records.size()));
  return records;
}

/// Uses the sidecar manifest `<path>.manifest.json` when no manifest is passed and one exists.
inline std::vector<CurveRecord> ingest(const std::filesystem::path& path,
                                       std::optional<DatasetManifest> manifest = std::nullopt,
                                       IngestOptions options = {}) {
  if (!manifest && std::filesystem::exists(manifest_path_for(path))) manifest = read_manifest(manifest_path_for(path));
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  return ingest(in, path.string(), manifest, options);
}

inline std::vector<CurveRecord> good_reduction_filter(std::span<const CurveRecord> records, std::uint32_t p) {
  std::vector<CurveRecord> out;
  for (const auto& r : records) {
    if (!r.conductor) throw MissingData(r.display_name() + ": good_reduction_filter needs a conductor");
    if (*r.conductor % p != 0) out.push_back(r);
  }
  return out;
}

/// Seeded split: shuffle positions with seeded_permutation(n, seed); the last
/// test_size shuffled positions form the test set, the rest the training set.
struct SplitSpec {
  std::uint64_t seed = 0;
  std::size_t test_size = 10000;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::string dataset_digest;
};

inline SplitSpec make_split(std::size_t n, std::uint64_t seed, std::size_t test_size) {
  if (n <= test_size)
    throw DatasetTooSmall("split needs more than " + std::to_string(test_size) + " records, got " + std::to_string(n));
  auto perm = seeded_permutation(n, seed);
  SplitSpec s;
  s.seed = seed;
  s.test_size = test_size;
  s.train.assign(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(test_size));
  s.test.assign(perm.end() - static_cast<std::ptrdiff_t>(test_size), perm.end());
  return s;
}

struct SplitSets {
  std::vector<CurveRecord> train;
  std::vector<CurveRecord> test;
};

inline SplitSets apply_split(std::span<const CurveRecord> records, const SplitSpec& spec) {
  SplitSets sets;
  sets.train.reserve(spec.train.size());
  sets.test.reserve(spec.test.size());
  for (auto i : spec.train) sets.train.push_back(records[i]);
  for (auto i : spec.test) sets.test.push_back(records[i]);
  return sets;
}

inline SplitSets split(std::span<const CurveRecord> records, SplitSpec& spec) {
  auto made = make_split(records.size(), spec.seed, spec.test_size);
  made.dataset_digest = dataset_digest(records);
  spec = made;
  return apply_split(records, spec);
}

inline void write_split_sidecar(const std::filesystem::path& path, const SplitSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["test_size"] = spec.test_size;
  j["dataset_digest"] = spec.dataset_digest;
  j["train"] = spec.train;
  j["test"] = spec.test;
  std::ofstream out(path);
  if (!out) throw DataError(path.string(), 0, "cannot write split sidecar");
  out << j.dump() << '\n';
}

inline SplitSpec read_split_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open split sidecar");
  SplitSpec s;
  try {
    auto j = nlohmann::json::parse(in);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.test_size = j.at("test_size").get<std::size_t>();
    s.dataset_digest = j.at("dataset_digest").get<std::string>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string(), 0, std::string("bad split sidecar: ") + e.what());
  }
  return s;
}

/// Replays a persisted split; the dataset must match the recorded digest.
inline SplitSets replay_split(std::span<const CurveRecord> records, const SplitSpec& spec) {
  if (!spec.dataset_digest.empty() && spec.dataset_digest != dataset_digest(records))
    throw DataError("split", 0, "dataset digest does not match the persisted split");
  for (auto i : spec.train)
    if (i >= records.size()) throw DataError("split", 0, "split index out of range");
  for (auto i : spec.test)
    if (i >= records.size()) throw DataError("split", 0, "split index out of range");
  return apply_split(records, spec);
}

/// Twist hashes for many curves, computed on `workers` threads.
inline std::vector<TwistHash> twist_hashes(std::span<const CurveRecord> records, unsigned workers = 1) {
  std::vector<TwistHash> out(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) { out[i] = twist_hash_of_curve(records[i]); });
  return out;
}

/// One record per twist hash: the first occurrence in ascending-conductor
/// order among records with conductor < max_conductor. Returned records carry
/// their hash in `stored_hash`.
inline std::vector<CurveRecord> dedup_by_hash(std::span<const CurveRecord> records, std::uint64_t max_conductor,
                                              unsigned workers = 1) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].conductor) throw MissingData(records[i].display_name() + ": dedup needs a conductor");
    if (i && *records[i].conductor < *records[i - 1].conductor)
      throw OrderingViolation("record " + std::to_string(i) + " (" + records[i].display_name() + ", N=" +
                              std::to_string(*records[i].conductor) + ") follows conductor " +
                              std::to_string(*records[i - 1].conductor));
  }
  std::size_t end = 0;
  while (end < records.size() && *records[end].conductor < max_conductor) ++end;
  const auto hashes = twist_hashes(records.first(end), workers);
  std::unordered_set<std::uint64_t> seen;
  std::vector<CurveRecord> out;
  for (std::size_t i = 0; i < end; ++i) {
    if (!seen.insert(hashes[i].value).second) continue;
    CurveRecord r = records[i];
    r.stored_hash = hashes[i].value;
    out.push_back(std::move(r));
  }
  return out;
}

/// CSV of (label, conductor, hash, ap); hash in decimal, ap as a bracketed list.
inline void write_dedup_csv(std::ostream& out, std::span<const CurveRecord> records) {
  out << "label,conductor,hash,ap\n";
  for (const auto& r : records) {
    std::string ap = "[";
    if (r.traces) {
      for (std::size_t i = 0; i < r.traces->size(); ++i) {
        if (i) ap += ',';
        ap += std::to_string((*r.traces)[i]);
      }
    }
    ap += ']';
    out << csv_escape(r.label.value_or("")) << ',' << r.conductor.value_or(0) << ','
        << twist_hash_of_curve(r).value << ',' << csv_escape(ap) << '\n';
  }
}

enum class PrimeOrder { Largest, Smallest };

inline std::string_view to_string(PrimeOrder o) { return o == PrimeOrder::Largest ? "largest" : "smallest"; }

struct SweepRow {
  int k = 0;
  PrimeOrder order = PrimeOrder::Largest;
  ClusterScores scores;
  /// ARI on the items whose truth class has at least two members; empty when
  /// fewer than two such items exist.
  std::optional<double> multi_instance_ari;
  std::size_t n = 0;
  std::size_t n_multi = 0;
};

/// Label of each record under the partition by (|a_q|) at the k largest or
/// smallest primes below 100.
inline std::vector<std::uint64_t> magnitude_partition(std::span<const CurveRecord> records, int k, PrimeOrder order) {
  if (k < 1 || k > static_cast<int>(kSmallPrimeCount)) throw std::invalid_argument("k must lie in [1, 25]");
  std::map<std::vector<int>, std::uint64_t> ids;
  std::vector<std::uint64_t> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    if (!r.traces || !r.traces->covers(97)) throw MissingData(r.display_name() + ": sweep needs traces below 100");
    std::vector<int> key(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      std::size_t idx = order == PrimeOrder::Largest ? kSmallPrimeCount - 1 - static_cast<std::size_t>(i)
                                                     : static_cast<std::size_t>(i);
      key[static_cast<std::size_t>(i)] = std::abs((*r.traces)[idx]);
    }
    labels.push_back(ids.try_emplace(std::move(key), ids.size()).first->second);
  }
  return labels;
}

/// Scores the magnitude partition against `truth` for every k in [k_min, k_max].
inline std::vector<SweepRow> sweep_k(std::span<const CurveRecord> records, std::span<const std::uint64_t> truth,
                                     int k_min, int k_max, PrimeOrder order, unsigned workers = 1) {
  detail::require_same_length(records.size(), truth.size(), "sweep_k");
  if (k_min < 1 || k_max > static_cast<int>(kSmallPrimeCount) || k_min > k_max)
    throw std::invalid_argument("sweep_k: need 1 <= k_min <= k_max <= 25");
  std::vector<SweepRow> rows(static_cast<std::size_t>(k_max - k_min + 1));
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const int k = k_min + static_cast<int>(i);
    const auto pred = magnitude_partition(records, k, order);
    SweepRow row;
    row.k = k;
    row.order = order;
    row.n = records.size();
    row.scores = cluster_scores<std::uint64_t, std::uint64_t>(truth, pred);
    auto [t_multi, p_multi] = restrict_multi_instance<std::uint64_t, std::uint64_t>(truth, pred);
    row.n_multi = t_multi.size();
    if (t_multi.size() >= 2) row.multi_instance_ari = ari(t_multi, p_multi);
    rows[i] = row;
  });
  return rows;
}

}  // namespace frobtwist
