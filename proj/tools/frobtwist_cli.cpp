// Command-line front end: one binary, one subcommand per pipeline stage.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frobtwist/frobtwist.hpp"

namespace fs = std::filesystem;
using namespace frobtwist;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
  bool quiet = false;
};

using Config = std::vector<std::pair<std::string, std::string>>;

/// Comment header echoed at the top of every output file. Contains nothing
/// run-dependent beyond config and input digests, so reruns are byte-identical.
void write_header(std::ostream& out, const std::string& command, const Config& config,
                  const std::vector<std::string>& inputs) {
  out << "# frobtwist " << FROBTWIST_VERSION << ' ' << command << '\n';
  out << "# config:";
  for (const auto& [k, v] : config) out << ' ' << k << '=' << v;
  out << '\n';
  for (const auto& in : inputs) out << "# input: " << in << " fnv1a64=" << file_digest(in) << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  out << std::setprecision(10);
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

void note(const GlobalOptions& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

std::optional<std::string> header_value(const CsvTable& t, const std::string& key) {
  for (const auto& c : t.comments) {
    auto pos = c.find(' ' + key + '=');
    if (pos == std::string::npos) continue;
    auto start = pos + key.size() + 2;
    auto end = c.find(' ', start);
    return c.substr(start, end == std::string::npos ? std::string::npos : end - start);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- ap

struct ApArgs {
  std::string ainvs;
  std::uint64_t conductor = 0;
  std::uint32_t bound = 100;
  std::string out;
};

WeierstrassCoeffs parse_ainvs(const std::string& s) {
  std::vector<BigInt> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.emplace_back(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("--ainvs: '" + item + "' is not an integer");
    }
  }
  if (v.size() != 5) throw std::invalid_argument("--ainvs expects 5 comma-separated integers");
  return {v[0], v[1], v[2], v[3], v[4]};
}

int run_ap(const ApArgs& a, const GlobalOptions&) {
  CurveRecord curve;
  curve.ainvs = parse_ainvs(a.ainvs);
  if (a.conductor) curve.conductor = a.conductor;
  if (std::string problem = validate(curve); !problem.empty()) throw std::invalid_argument(problem);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file = open_output(a.out);
    out = &file;
  }
  write_header(*out, "ap",
               {{"ainvs", a.ainvs}, {"conductor", std::to_string(a.conductor)}, {"bound", std::to_string(a.bound)}},
               {});
  *out << "prime,a_p,reduction_type\n";
  for (const auto& t : local_traces(curve, a.bound)) *out << t.p << ',' << t.ap << ',' << to_string(t.type) << '\n';
  return 0;
}

// ---------------------------------------------------------------- hash

struct HashArgs {
  std::string input, output;
};

int run_hash(const HashArgs& a, const GlobalOptions& g) {
  const auto records = ingest(a.input, std::nullopt, IngestOptions{.build_missing_traces = false});
  const auto hashes = twist_hashes(records, g.workers);
  auto out = open_output(a.output);
  write_header(out, "hash", {{"workers", "*"}}, {a.input});
  out << "label,conductor,hash\n";
  for (std::size_t i = 0; i < records.size(); ++i)
    out << csv_escape(records[i].label.value_or("")) << ',' << records[i].conductor.value_or(0) << ','
        << hashes[i].value << '\n';
  note(g, "hashed " + std::to_string(records.size()) + " curves");
  return 0;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input, manifest, output;
  bool no_build = false;
};

int run_ingest(const IngestArgs& a, const GlobalOptions& g) {
  std::optional<DatasetManifest> manifest;
  if (!a.manifest.empty()) manifest = read_manifest(a.manifest);
  const auto records = ingest(a.input, manifest, IngestOptions{.build_missing_traces = !a.no_build});
  std::cout << records.size() << " records validated\n";
  if (!a.output.empty()) {
    write_jsonl(fs::path(a.output), records);
    DatasetManifest m = manifest.value_or(DatasetManifest{});
    if (!records.empty() && records.front().traces) m.prime_bound = records.front().traces->bound();
    m.record_count = records.size();
    if (m.source.empty()) m.source = a.input;
    write_manifest(manifest_path_for(a.output), m);
  }
  note(g, "ok");
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string train, test, key = "twist-hash", out;
  std::uint32_t prime = 2;
  int k = 8;
  std::uint64_t pair_cap = 0;
};

KeyMode parse_key(const std::string& key, int k) {
  if (key == "twist-hash") return KeyMode::twist_hash();
  if (key == "proxy") {
    if (k < 1 || k > kProxyMaxK) throw std::invalid_argument("--k must lie in [1, 16]");
    return KeyMode::proxy(k);
  }
  throw std::invalid_argument("--key must be twist-hash or proxy");
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> preds) {
  out << "label,prime,true,predicted,provenance\n";
  for (const auto& p : preds)
    out << csv_escape(p.label) << ',' << p.prime << ',' << (p.truth ? std::to_string(*p.truth) : std::string()) << ','
        << p.predicted << ',' << to_string(p.provenance) << '\n';
}

int run_predict(const PredictArgs& a, const GlobalOptions& g) {
  if (!is_prime(a.prime) || a.prime >= 100) throw std::invalid_argument("--prime must be a prime below 100");
  const KeyMode mode = parse_key(a.key, a.k);
  const auto train = ingest(a.train);
  const auto test = ingest(a.test);
  MatcherOptions options{.pair_cap_per_class = a.pair_cap, .workers = g.workers};
  std::vector<PredictionRecord> preds;
  if (mode.kind == KeyMode::Kind::TwistHash)
    preds = SignMatcher(train, TwistHashKey{}, a.prime, options).predict_all(test, g.seed);
  else
    preds = SignMatcher(train, ProxyKeyFn{mode.k, a.prime}, a.prime, options).predict_all(test, g.seed);
  auto out = open_output(a.out);
  write_header(out, "predict",
               {{"prime", std::to_string(a.prime)},
                {"key", mode.name()},
                {"seed", std::to_string(g.seed)},
                {"pair_cap", std::to_string(a.pair_cap)},
                {"good_count", std::to_string(train.size() + test.size())}},
               {a.train, a.test});
  write_predictions(out, preds);
  note(g, "wrote " + std::to_string(preds.size()) + " predictions to " + a.out);
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string input, key = "twist-hash", out_dir;
  std::vector<std::uint32_t> primes;
  int k = 8;
  std::size_t test_size = 10000;
  std::uint64_t pair_cap = 0;
};

int run_experiment_cmd(const ExperimentArgs& a, const GlobalOptions& g) {
  const KeyMode mode = parse_key(a.key, a.k);
  const auto records = ingest(a.input);
  std::vector<std::uint32_t> primes = a.primes.empty() ? small_primes() : a.primes;
  fs::create_directories(a.out_dir);
  for (std::uint32_t p : primes) {
    if (!is_prime(p) || p >= 100) throw std::invalid_argument("--primes entries must be primes below 100");
    const auto good = good_reduction_filter(records, p);
    auto result = run_experiment(good, p, mode, a.test_size, g.seed,
                                 MatcherOptions{.pair_cap_per_class = a.pair_cap, .workers = g.workers});
    const std::string path = (fs::path(a.out_dir) / ("preds_p" + std::to_string(p) + ".csv")).string();
    auto out = open_output(path);
    write_header(out, "experiment",
                 {{"prime", std::to_string(p)},
                  {"key", mode.name()},
                  {"seed", std::to_string(g.seed)},
                  {"test_size", std::to_string(a.test_size)},
                  {"pair_cap", std::to_string(a.pair_cap)},
                  {"good_count", std::to_string(good.size())}},
                 {a.input});
    write_predictions(out, result.predictions);
    note(g, "p=" + std::to_string(p) + " overall MCC " + fmt(result.report.overall_mcc));
  }
  return 0;
}

// ---------------------------------------------------------------- shared prediction reading

struct PredictionFile {
  std::vector<PredictionRecord> records;
  std::uint64_t good_count = 0;
};

PredictionFile read_predictions(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto c_label = t.column("label", path), c_prime = t.column("prime", path), c_true = t.column("true", path),
             c_pred = t.column("predicted", path), c_prov = t.column("provenance", path);
  PredictionFile f;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      PredictionRecord p;
      p.label = row[c_label];
      p.prime = static_cast<std::uint32_t>(std::stoul(row[c_prime]));
      if (!row[c_true].empty()) p.truth = std::stoi(row[c_true]);
      p.predicted = std::stoi(row[c_pred]);
      auto prov = parse_provenance(row[c_prov]);
      if (!prov) throw std::invalid_argument("unknown provenance '" + row[c_prov] + "'");
      p.provenance = *prov;
      f.records.push_back(p);
    } catch (const std::exception& e) {
      throw DataError(path, t.line_numbers[r], e.what());
    }
  }
  if (auto gc = header_value(t, "good_count")) f.good_count = std::stoull(*gc);
  return f;
}

std::map<std::uint32_t, std::vector<PredictionRecord>> by_prime(const std::vector<PredictionRecord>& preds) {
  std::map<std::uint32_t, std::vector<PredictionRecord>> out;
  for (const auto& p : preds) out[p.prime].push_back(p);
  return out;
}

std::vector<std::int32_t> truths_of(const std::vector<PredictionRecord>& preds, const std::string& source) {
  std::vector<std::int32_t> v;
  for (const auto& p : preds) {
    if (!p.truth) throw DataError(source, 0, "prediction for '" + p.label + "' has no true value");
    v.push_back(*p.truth);
  }
  return v;
}

std::vector<std::int32_t> predicted_of(const std::vector<PredictionRecord>& preds) {
  std::vector<std::int32_t> v;
  for (const auto& p : preds) v.push_back(p.predicted);
  return v;
}

void check_aligned(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("prediction files cover different numbers of curves");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].label != b[i].label || a[i].truth != b[i].truth)
      throw std::invalid_argument("prediction files are not aligned at row " + std::to_string(i + 1) + " ('" +
                                  a[i].label + "' vs '" + b[i].label + "')");
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred, pred_b, train, out, format = "csv";
  std::vector<std::string> metrics{"mcc", "mae", "rmse"};
  std::uint64_t draws = 1000;
};

int run_eval(const EvalArgs& a, const GlobalOptions& g) {
  const auto fa = read_predictions(a.pred);
  std::optional<PredictionFile> fb;
  if (!a.pred_b.empty()) fb = read_predictions(a.pred_b);
  std::optional<std::vector<CurveRecord>> train;
  std::vector<std::string> inputs{a.pred};
  if (fb) inputs.push_back(a.pred_b);
  if (!a.train.empty()) {
    train = ingest(a.train);
    inputs.push_back(a.train);
  }

  struct Row {
    std::uint32_t prime;
    std::size_t n;
    std::string metric;
    double value;
    std::optional<double> null_mean, p_value;
  };
  std::vector<Row> rows;
  const auto groups_a = by_prime(fa.records);
  std::map<std::uint32_t, std::vector<PredictionRecord>> groups_b;
  if (fb) groups_b = by_prime(fb->records);

  for (const auto& [p, preds] : groups_a) {
    const auto yt = truths_of(preds, a.pred);
    const auto yp = predicted_of(preds);
    for (const auto& m : a.metrics) {
      if (m == "mcc") {
        rows.push_back({p, yt.size(), m, mcc(yt, yp), {}, {}});
      } else if (m == "mae" || m == "rmse") {
        auto e = error_stats(yt, yp);
        rows.push_back({p, yt.size(), m, m == "mae" ? e.mae : e.rmse, {}, {}});
      } else if (m == "mod2" || m == "mod3" || m == "mod4") {
        rows.push_back({p, yt.size(), m, mod_reduce_eval(yt, yp, m.back() - '0'), {}, {}});
      } else if (m == "disagreement") {
        if (!fb) throw std::invalid_argument("metric 'disagreement' needs --pred-b");
        auto it = groups_b.find(p);
        if (it == groups_b.end()) throw std::invalid_argument("--pred-b has no predictions at p=" + std::to_string(p));
        check_aligned(preds, it->second);
        rows.push_back({p, yt.size(), m, disagreement(yp, predicted_of(it->second)), {}, {}});
      } else if (m == "null") {
        if (!train) throw std::invalid_argument("metric 'null' needs --train to define the training marginal");
        const auto dist = empirical_distribution(good_reduction_filter(*train, p), p);
        for (const auto& r : significance_table(yt, yp, dist, a.draws, g.seed, g.workers))
          rows.push_back({p, yt.size(), "null_" + r.task, r.result.observed, r.result.null_mean, r.result.p_value});
      } else {
        throw std::invalid_argument("unknown metric '" + m + "'");
      }
    }
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file = open_output(a.out);
    out = &file;
  }
  std::string metric_list;
  for (const auto& m : a.metrics) metric_list += (metric_list.empty() ? "" : ";") + m;
  write_header(*out, "eval",
               {{"metrics", metric_list}, {"draws", std::to_string(a.draws)}, {"seed", std::to_string(g.seed)}},
               inputs);
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  if (a.format == "markdown") {
    *out << "| prime | n | metric | value | null mean | p-value |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows)
      *out << "| " << r.prime << " | " << r.n << " | " << r.metric << " | " << fmt(r.value) << " | "
           << opt(r.null_mean) << " | " << opt(r.p_value) << " |\n";
  } else {
    *out << "prime,n,metric,value,null_mean,p_value\n";
    for (const auto& r : rows)
      *out << r.prime << ',' << r.n << ',' << r.metric << ',' << fmt(r.value) << ',' << opt(r.null_mean) << ','
           << opt(r.p_value) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> pred, pred_b;
  std::string out_dir;
};

int run_report(const ReportArgs& a, const GlobalOptions& g) {
  auto load = [](const std::vector<std::string>& files) {
    std::map<std::uint32_t, std::pair<std::vector<PredictionRecord>, std::uint64_t>> groups;
    for (const auto& f : files) {
      auto pf = read_predictions(f);
      for (auto& [p, preds] : by_prime(pf.records)) {
        auto& slot = groups[p];
        slot.first.insert(slot.first.end(), preds.begin(), preds.end());
        slot.second = pf.good_count;
      }
    }
    return groups;
  };
  const auto ga = load(a.pred);
  const auto gb = load(a.pred_b);
  const bool compare = !a.pred_b.empty();
  std::vector<std::string> inputs = a.pred;
  inputs.insert(inputs.end(), a.pred_b.begin(), a.pred_b.end());
  fs::create_directories(a.out_dir);
  const Config config{{"models", compare ? "2" : "1"}};

  auto table = open_output((fs::path(a.out_dir) / "model_table.csv").string());
  auto curve = open_output((fs::path(a.out_dir) / "per_prime_mcc.csv").string());
  write_header(table, "report", config, inputs);
  write_header(curve, "report", config, inputs);
  table << "prime,good_count,test_count,a_probabilistic,a_correct,a_deterministic_mcc,a_overall_mcc";
  curve << "prime,a_mcc";
  if (compare) {
    table << ",b_probabilistic,b_correct,b_deterministic_mcc,b_overall_mcc";
    curve << ",b_mcc";
  }
  table << '\n';
  curve << '\n';

  std::ofstream agreement;
  if (compare) {
    agreement = open_output((fs::path(a.out_dir) / "agreement.csv").string());
    write_header(agreement, "report", config, inputs);
    agreement << "prime,both_correct,a_correct_b_wrong,b_correct_a_wrong,both_wrong,disagreement_pct\n";
  }
  std::vector<double> mcc_a, mcc_b;
  for (const auto& [p, entry] : ga) {
    const auto ra = summarize(entry.first, entry.second);
    table << p << ',' << ra.good_count << ',' << ra.test_count << ',' << ra.probabilistic << ',' << ra.correct << ','
          << fmt(ra.deterministic_mcc) << ',' << fmt(ra.overall_mcc);
    curve << p << ',' << fmt(ra.overall_mcc);
    if (compare) {
      auto it = gb.find(p);
      if (it == gb.end()) throw std::invalid_argument("--pred-b has no predictions at p=" + std::to_string(p));
      check_aligned(entry.first, it->second.first);
      const auto rb = summarize(it->second.first, it->second.second);
      table << ',' << rb.probabilistic << ',' << rb.correct << ',' << fmt(rb.deterministic_mcc) << ','
            << fmt(rb.overall_mcc);
      curve << ',' << fmt(rb.overall_mcc);
      const auto yt = truths_of(entry.first, "report");
      const auto o = outcome_breakdown<std::int32_t>(yt, predicted_of(entry.first), predicted_of(it->second.first));
      agreement << p << ',' << o.both_correct << ',' << o.a_only_correct << ',' << o.b_only_correct << ','
                << o.both_wrong << ',' << std::fixed << std::setprecision(2) << 100.0 * o.disagreement << '\n';
      agreement << std::defaultfloat << std::setprecision(10);
      mcc_a.push_back(ra.overall_mcc);
      mcc_b.push_back(rb.overall_mcc);
    }
    table << '\n';
    curve << '\n';
  }
  if (compare) {
    auto prox = open_output((fs::path(a.out_dir) / "proximity.csv").string());
    write_header(prox, "report", config, inputs);
    const auto r = proxy_proximity_report(mcc_a, mcc_b);
    prox << "mae,rmse,max_diff,mean_diff\n"
         << fmt(r.mae) << ',' << fmt(r.rmse) << ',' << fmt(r.max_diff) << ',' << fmt(r.mean_diff) << '\n';
  }
  note(g, "report written to " + a.out_dir);
  return 0;
}

// ---------------------------------------------------------------- dedup / split / sweep

struct DedupArgs {
  std::string input, output;
  std::uint64_t max_conductor = 10000000;
};

int run_dedup(const DedupArgs& a, const GlobalOptions& g) {
  const auto records = ingest(a.input, std::nullopt, IngestOptions{.build_missing_traces = false});
  const auto kept = dedup_by_hash(records, a.max_conductor, g.workers);
  auto out = open_output(a.output);
  write_header(out, "dedup", {{"max_conductor", std::to_string(a.max_conductor)}}, {a.input});
  write_dedup_csv(out, kept);
  note(g, "kept " + std::to_string(kept.size()) + " of " + std::to_string(records.size()) + " records");
  return 0;
}

struct SplitArgs {
  std::string input, train_out, test_out, indices_out;
  std::size_t test_size = 10000;
  std::uint32_t prime = 0;
};

int run_split(const SplitArgs& a, const GlobalOptions& g) {
  auto records = ingest(a.input);
  if (a.prime) records = good_reduction_filter(records, a.prime);
  SplitSpec spec;
  spec.seed = g.seed;
  spec.test_size = a.test_size;
  const auto sets = split(records, spec);
  write_jsonl(fs::path(a.train_out), sets.train);
  write_jsonl(fs::path(a.test_out), sets.test);
  const std::uint32_t bound = records.front().traces ? records.front().traces->bound() : 100;
  write_manifest(manifest_path_for(a.train_out), {bound, sets.train.size(), false, a.input});
  write_manifest(manifest_path_for(a.test_out), {bound, sets.test.size(), false, a.input});
  write_split_sidecar(a.indices_out.empty() ? a.train_out + ".split.json" : a.indices_out, spec);
  note(g, "train " + std::to_string(sets.train.size()) + ", test " + std::to_string(sets.test.size()));
  return 0;
}

struct SweepArgs {
  std::string input, out, order = "largest";
  int k_min = 1, k_max = 25;
};

int run_sweep(const SweepArgs& a, const GlobalOptions& g) {
  const auto records = ingest(a.input);
  std::vector<std::uint64_t> truth;
  for (const auto& h : twist_hashes(records, g.workers)) truth.push_back(h.value);
  const PrimeOrder order = a.order == "smallest" ? PrimeOrder::Smallest : PrimeOrder::Largest;
  if (a.order != "smallest" && a.order != "largest") throw std::invalid_argument("--order must be largest or smallest");
  const auto rows = sweep_k(records, truth, a.k_min, a.k_max, order, g.workers);
  auto out = open_output(a.out);
  write_header(out, "sweep-k",
               {{"k_min", std::to_string(a.k_min)}, {"k_max", std::to_string(a.k_max)}, {"order", a.order}},
               {a.input});
  out << "k,order,n,ari,homogeneity,completeness,v_measure,n_multi,ari_multi\n";
  for (const auto& r : rows)
    out << r.k << ',' << to_string(r.order) << ',' << r.n << ',' << fmt(r.scores.ari) << ','
        << fmt(r.scores.homogeneity) << ',' << fmt(r.scores.completeness) << ',' << fmt(r.scores.v_measure) << ','
        << r.n_multi << ',' << (r.multi_instance_ari ? fmt(*r.multi_instance_ari) : std::string()) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frobtwist: trace-of-Frobenius twist-class baselines"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (default: $FROBTWIST_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress progress notes");
  auto global = [&](CLI::App* sub) {
    sub->fallthrough();
    return sub;
  };

  ApArgs ap;
  auto* s_ap = global(app.add_subcommand("ap", "Traces of Frobenius and reduction types for one curve"));
  s_ap->add_option("--ainvs", ap.ainvs, "a1,a2,a3,a4,a6")->required();
  s_ap->add_option("--conductor", ap.conductor, "Conductor N");
  s_ap->add_option("--bound", ap.bound, "Primes below this bound")->capture_default_str();
  s_ap->add_option("--out", ap.out, "Output CSV (default: stdout)");

  HashArgs hs;
  auto* s_hash = global(app.add_subcommand("hash", "Twist hashes of a JSONL curve file"));
  s_hash->add_option("--input", hs.input)->required()->check(CLI::ExistingFile);
  s_hash->add_option("--output", hs.output)->required();

  IngestArgs ig;
  auto* s_ingest = global(app.add_subcommand("ingest", "Validate a JSONL curve file"));
  s_ingest->add_option("--input", ig.input)->required()->check(CLI::ExistingFile);
  s_ingest->add_option("--manifest", ig.manifest)->check(CLI::ExistingFile);
  s_ingest->add_option("--output", ig.output, "Write normalized records (with built traces)");
  s_ingest->add_flag("--no-build", ig.no_build, "Do not build missing trace tables");

  PredictArgs pr;
  auto* s_pred = global(app.add_subcommand("predict", "Sign-matching predictions of a_p"));
  s_pred->add_option("--train", pr.train)->required()->check(CLI::ExistingFile);
  s_pred->add_option("--test", pr.test)->required()->check(CLI::ExistingFile);
  s_pred->add_option("--prime", pr.prime)->required();
  s_pred->add_option("--key", pr.key, "twist-hash or proxy")->capture_default_str();
  s_pred->add_option("--k", pr.k, "Proxy key length")->capture_default_str();
  s_pred->add_option("--pair-cap", pr.pair_cap, "Max indexed pairs per class (0 = unlimited)");
  s_pred->add_option("--out", pr.out)->required();

  ExperimentArgs ex;
  auto* s_exp = global(app.add_subcommand("experiment", "Filter, split and predict per prime from one dataset"));
  s_exp->add_option("--input", ex.input)->required()->check(CLI::ExistingFile);
  s_exp->add_option("--primes", ex.primes, "Target primes (default: all 25 below 100)")->delimiter(',');
  s_exp->add_option("--key", ex.key)->capture_default_str();
  s_exp->add_option("--k", ex.k)->capture_default_str();
  s_exp->add_option("--test-size", ex.test_size)->capture_default_str();
  s_exp->add_option("--pair-cap", ex.pair_cap);
  s_exp->add_option("--out-dir", ex.out_dir)->required();

  EvalArgs ev;
  auto* s_eval = global(app.add_subcommand("eval", "Metrics over prediction CSVs"));
  s_eval->add_option("--pred", ev.pred)->required()->check(CLI::ExistingFile);
  s_eval->add_option("--pred-b", ev.pred_b)->check(CLI::ExistingFile);
  s_eval->add_option("--train", ev.train, "Training JSONL (for the null baseline)")->check(CLI::ExistingFile);
  s_eval->add_option("--metrics", ev.metrics, "mcc,mae,rmse,disagreement,mod2,mod3,mod4,null")->delimiter(',');
  s_eval->add_option("--draws", ev.draws)->capture_default_str()->check(CLI::PositiveNumber);
  s_eval->add_option("--format", ev.format)->check(CLI::IsMember({"csv", "markdown"}));
  s_eval->add_option("--out", ev.out);

  ReportArgs rp;
  auto* s_report = global(app.add_subcommand("report", "Per-prime model tables and figure CSVs"));
  s_report->add_option("--pred", rp.pred)->required()->check(CLI::ExistingFile);
  s_report->add_option("--pred-b", rp.pred_b)->check(CLI::ExistingFile);
  s_report->add_option("--out-dir", rp.out_dir)->required();

  DedupArgs dd;
  auto* s_dedup = global(app.add_subcommand("dedup", "One representative per twist hash"));
  s_dedup->add_option("--input", dd.input)->required()->check(CLI::ExistingFile);
  s_dedup->add_option("--max-conductor", dd.max_conductor)->capture_default_str();
  s_dedup->add_option("--output", dd.output)->required();

  SplitArgs sp;
  auto* s_split = global(app.add_subcommand("split", "Seeded train/test split"));
  s_split->add_option("--input", sp.input)->required()->check(CLI::ExistingFile);
  s_split->add_option("--test-size", sp.test_size)->capture_default_str();
  s_split->add_option("--prime", sp.prime, "Keep only curves of good reduction at this prime");
  s_split->add_option("--train-out", sp.train_out)->required();
  s_split->add_option("--test-out", sp.test_out)->required();
  s_split->add_option("--indices-out", sp.indices_out, "Split sidecar (default: <train-out>.split.json)");

  SweepArgs sw;
  auto* s_sweep = global(app.add_subcommand("sweep-k", "Partition-by-magnitudes agreement sweep"));
  s_sweep->alias("cluster-eval");
  s_sweep->add_option("--input", sw.input)->required()->check(CLI::ExistingFile);
  s_sweep->add_option("--k-min", sw.k_min)->capture_default_str();
  s_sweep->add_option("--k-max", sw.k_max)->capture_default_str();
  s_sweep->add_option("--order", sw.order)->check(CLI::IsMember({"largest", "smallest"}))->capture_default_str();
  s_sweep->add_option("--out", sw.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s_ap) return run_ap(ap, g);
    if (*s_hash) return run_hash(hs, g);
    if (*s_ingest) return run_ingest(ig, g);
    if (*s_pred) return run_predict(pr, g);
    if (*s_exp) return run_experiment_cmd(ex, g);
    if (*s_eval) return run_eval(ev, g);
    if (*s_report) return run_report(rp, g);
    if (*s_dedup) return run_dedup(dd, g);
    if (*s_split) return run_split(sp, g);
    if (*s_sweep) return run_sweep(sw, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
