#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "proxkit/rng.hpp"

namespace proxkit {

/// FNV-1a over the canonical (sorted-key) JSON dump; identifies a config in
/// report streams without embedding file paths or timestamps.
inline std::uint64_t fnv1a_hash(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

/// Shortest round-trip decimal form, identical to the JSON encoding, so CSV
/// and JSONL streams agree on every number.
inline std::string num_str(double v) { return nlohmann::json(v).dump(); }

inline nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline void write_jsonl_line(std::ostream& os, const nlohmann::json& j) {
  os << j.dump() << '\n';
}

/// Minimal RFC-4180 style writer. All numeric cells should go through
/// num_str so byte-level reproducibility carries over to CSV output.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os_ << ',';
      os_ << escape(cells[i]);
    }
    os_ << '\n';
  }

  static std::string escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (const char c : cell) {
      if (c == '"') out += "\"\"";
      else out += c;
    }
    out += '"';
    return out;
  }

 private:
  std::ostream& os_;
};

}  // namespace proxkit
