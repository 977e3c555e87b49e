#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcircle/error.hpp"

namespace tcircle {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// Process exit code for a verdict: 0 pass, 1 fail, 2 inconclusive.
inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::pass: return 0;
    case Verdict::fail: return 1;
    case Verdict::inconclusive: return 2;
  }
  return 3;
}

/// A named table inside a report's evidence.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<ojson>> rows;

  ojson to_json() const {
    ojson rs = ojson::array();
    for (const auto& r : rows) {
      ojson row = ojson::array();
      for (const auto& c : r) row.push_back(c);
      rs.push_back(std::move(row));
    }
    return ojson{{"columns", columns}, {"rows", std::move(rs)}};
  }
};

struct LemmaReport {
  std::string lemma_id;
  ojson map = ojson::object();
  ojson params = ojson::object();
  Verdict verdict = Verdict::inconclusive;
  std::string budget;  // which budget was hit, for inconclusive verdicts
  ojson evidence = ojson::object();
  std::uint64_t seed = 0;
  std::vector<std::string> notes;

  void add_table(const std::string& name, const Table& t) { evidence[name] = t.to_json(); }

  ojson to_json() const {
    ojson j;
    j["lemma_id"] = lemma_id;
    j["map"] = map;
    j["params"] = params;
    j["verdict"] = to_string(verdict);
    if (verdict == Verdict::inconclusive) j["budget"] = budget;
    j["evidence"] = evidence;
    j["seed"] = seed;
    j["notes"] = notes;
    j["versions"] = ojson{{"tcircle", kVersion}, {"report_format", 1}};
    return j;
  }
};

namespace detail {

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_json(std::ostream& os, const ojson& j, int indent, int level) {
  const std::string pad(static_cast<std::size_t>(indent * (level + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * level), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << ojson(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, level + 1);
      }
      os << "\n" << close_pad << "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Rows of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_json(os, j[i], indent, level + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_json(os, j[i], indent, level + 1);
      }
      os << "\n" << close_pad << "]";
      return;
    }
    case ojson::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

/// Deterministic JSON: insertion-ordered keys, floats with 17 significant
/// digits, non-finite floats as null.
inline void write_json(std::ostream& os, const ojson& j) {
  detail::write_json(os, j, 2, 0);
  os << "\n";
}

inline std::string dump_json(const ojson& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

inline void write_csv(std::ostream& os, const ojson& table) {
  const auto& cols = table.at("columns");
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].get<std::string>();
  os << "\n";
  for (const auto& row : table.at("rows")) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      const auto& c = row[i];
      if (c.is_number_float()) {
        os << detail::format_double(c.get<double>());
      } else if (c.is_string()) {
        os << c.get<std::string>();
      } else {
        os << c.dump();
      }
    }
    os << "\n";
  }
}

/// Writes every table of the evidence as CSV. The first table goes to `path`;
/// the others to `path` with "_<name>" inserted before the extension.
inline void write_report_csv(const std::string& path, const LemmaReport& report) {
  bool first = true;
  for (auto it = report.evidence.begin(); it != report.evidence.end(); ++it) {
    const auto& v = it.value();
    if (!v.is_object() || !v.contains("columns") || !v.contains("rows")) continue;
    std::string target = path;
    if (!first) {
      const auto dot = path.find_last_of('.');
      const auto slash = path.find_last_of('/');
      const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
      target = has_ext ? path.substr(0, dot) + "_" + it.key() + path.substr(dot) : path + "_" + it.key();
    }
    std::ofstream f(target);
    if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + target);
    write_csv(f, v);
    first = false;
  }
}

}  // namespace tcircle
