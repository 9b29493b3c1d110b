#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "frobtwist/curve.hpp"

namespace frobtwist {

/// Malformed or invalid input, with file and line context when known.
class DataError : public Error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& message)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
        source_(source),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// 64-bit FNV-1a; used to fingerprint inputs for run headers and split sidecars.
class Fnv1a64 {
 public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) state_ = (state_ ^ c) * 0x100000001b3ULL;
  }
  std::uint64_t value() const { return state_; }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << state_;
    return os.str();
  }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  Fnv1a64 h;
  std::string buf(1 << 16, '\0');
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

/// Sidecar metadata for a JSONL record file.
struct DatasetManifest {
  std::uint32_t prime_bound = 100;
  std::optional<std::uint64_t> record_count;
  bool ascending_conductor = false;
  std::string source;
};

inline std::filesystem::path manifest_path_for(const std::filesystem::path& data) {
  return std::filesystem::path(data.string() + ".manifest.json");
}

inline nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["prime_bound"] = m.prime_bound;
  if (m.record_count) j["record_count"] = *m.record_count;
  j["ordering"] = m.ascending_conductor ? "ascending_conductor" : "unordered";
  j["source"] = m.source;
  return j;
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open manifest");
  DatasetManifest m;
  try {
    auto j = nlohmann::json::parse(in);
    m.prime_bound = j.at("prime_bound").get<std::uint32_t>();
    if (j.contains("record_count")) m.record_count = j["record_count"].get<std::uint64_t>();
    m.ascending_conductor = j.value("ordering", std::string("unordered")) == "ascending_conductor";
    m.source = j.value("source", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string(), 0, std::string("bad manifest: ") + e.what());
  }
  if (m.prime_bound < 2) throw DataError(path.string(), 0, "prime_bound must be >= 2");
  return m;
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string(), 0, "cannot write manifest");
  out << to_json(m).dump(2) << '\n';
}

namespace detail {

inline BigInt json_to_bigint(const nlohmann::json& v) {
  if (v.is_number_integer()) {
    if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
    return BigInt(v.get<std::int64_t>());
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.empty() || s.find_first_not_of("-0123456789") != std::string::npos || s.find('-', 1) != std::string::npos)
      throw std::invalid_argument("'" + s + "' is not a decimal integer");
    return BigInt(s);
  }
  throw std::invalid_argument("expected an integer or a decimal string");
}

inline nlohmann::ordered_json bigint_to_json(const BigInt& v) {
  if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
    return v.convert_to<std::int64_t>();
  return v.str();
}

}  // namespace detail

/// Parses one JSONL record. `prime_bound` fixes the bound of the `ap` array when
/// given; otherwise it is inferred from the array length.
inline CurveRecord parse_record(std::string_view line, std::optional<std::uint32_t> prime_bound) {
  const auto j = nlohmann::json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  CurveRecord rec;
  if (j.contains("label") && !j["label"].is_null()) rec.label = j["label"].get<std::string>();
  if (j.contains("conductor") && !j["conductor"].is_null()) {
    const auto& c = j["conductor"];
    if (!c.is_number_integer() || c.get<std::int64_t>() < 1) throw std::invalid_argument("conductor must be a positive integer");
    rec.conductor = c.get<std::uint64_t>();
  }
  if (j.contains("ainvs") && !j["ainvs"].is_null()) {
    const auto& a = j["ainvs"];
    if (!a.is_array() || a.size() != 5) throw std::invalid_argument("ainvs must be an array of 5 integers");
    rec.ainvs = WeierstrassCoeffs{detail::json_to_bigint(a[0]), detail::json_to_bigint(a[1]),
                                  detail::json_to_bigint(a[2]), detail::json_to_bigint(a[3]),
                                  detail::json_to_bigint(a[4])};
  }
  if (j.contains("ap") && !j["ap"].is_null()) {
    auto values = j["ap"].get<std::vector<std::int32_t>>();
    const std::uint32_t bound = prime_bound ? *prime_bound : inferred_bound_for_count(values.size());
    rec.traces = TraceTable(bound, std::move(values));
  }
  if (j.contains("hash") && !j["hash"].is_null()) {
    BigInt h = detail::json_to_bigint(j["hash"]);
    if (h < 0 || h >= BigInt((std::uint64_t{1} << 61) - 1)) throw std::invalid_argument("hash out of range");
    rec.stored_hash = h.convert_to<std::uint64_t>();
  }
  return rec;
}

inline std::string serialize_record(const CurveRecord& rec) {
  nlohmann::ordered_json j;
  if (rec.label) j["label"] = *rec.label;
  if (rec.conductor) j["conductor"] = *rec.conductor;
  if (rec.ainvs) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& v : rec.ainvs->as_array()) a.push_back(detail::bigint_to_json(v));
    j["ainvs"] = a;
  }
  if (rec.traces) j["ap"] = std::vector<std::int32_t>(rec.traces->values().begin(), rec.traces->values().end());
  if (rec.stored_hash) j["hash"] = *rec.stored_hash;
  return j.dump();
}

inline void write_jsonl(std::ostream& out, std::span<const CurveRecord> records) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

inline void write_jsonl(const std::filesystem::path& path, std::span<const CurveRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string(), 0, "cannot open for writing");
  write_jsonl(out, records);
}

/// Digest of the canonical serialization of a record sequence.
inline std::string dataset_digest(std::span<const CurveRecord> records) {
  Fnv1a64 h;
  for (const auto& r : records) {
    h.update(serialize_record(r));
    h.update("\n");
  }
  return h.hex();
}

// ---- CSV ----

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

/// CSV with leading '#' comment lines and a header row.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t column(std::string_view name, const std::string& source) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError(source, 0, "missing column '" + std::string(name) + "'");
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  CsvTable t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    auto fields = csv_split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError(path.string(), n, "expected " + std::to_string(t.header.size()) + " fields, got " +
                                            std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(n);
  }
  return t;
}

}  // namespace frobtwist
