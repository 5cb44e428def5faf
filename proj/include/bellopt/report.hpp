// CSV / JSON emission. CSV: header row, comma separated, 12 significant
// digits. JSON: an object with "schema_version": "1".

#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bellopt/inequalities.hpp"
#include "bellopt/lhv.hpp"
#include "bellopt/scan.hpp"

namespace bellopt::report {

inline constexpr const char* kSchemaVersion = "1";

using Cell = std::variant<std::monostate, bool, double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline std::string csv_field(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string quoted = "\"";
      for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + "\"";
    }
  };
  return std::visit(Visitor{}, cell);
}

inline void write_csv(std::ostream& os, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << '\n';
  }
}

inline nlohmann::json json_value(const Cell& cell) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(bool v) const { return v; }
    nlohmann::json operator()(double v) const {
      // JSON has no infinities; encode them as null.
      if (!std::isfinite(v)) return nullptr;
      return v;
    }
    nlohmann::json operator()(long long v) const { return v; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

inline nlohmann::json to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = json_value(row[i]);
    rows.push_back(std::move(obj));
  }
  return {{"schema_version", kSchemaVersion}, {"columns", table.columns}, {"rows", rows}};
}

inline void write_json(std::ostream& os, const Table& table) { os << to_json(table).dump(2) << '\n'; }

inline std::string join_angles(const std::vector<double>& angles) {
  std::string out;
  for (std::size_t i = 0; i < angles.size(); ++i) out += (i ? ";" : "") + format_number(angles[i]);
  return out;
}

template <typename T>
Cell optional_cell(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  if constexpr (std::is_integral_v<T>) {
    return static_cast<long long>(*v);
  } else {
    return static_cast<double>(*v);
  }
}

inline Table inequality_table(const std::vector<InequalityReport>& reports) {
  Table t;
  t.columns = {"kind",   "L",     "source",        "gain",        "cutoff_pairs", "tail_weight",
               "lhs",    "lower_bound", "upper_bound", "margin",      "violated",     "thetas",
               "phis"};
  for (const auto& r : reports) {
    t.rows.push_back({to_string(r.kind), static_cast<long long>(r.L), r.source,
                      optional_cell(r.gain), optional_cell(r.cutoff_pairs),
                      optional_cell(r.tail_weight), r.lhs, r.lower_bound, r.upper_bound, r.margin,
                      r.violated(), join_angles(r.settings.thetas),
                      join_angles(r.settings.phis)});
  }
  return t;
}

inline Table table1_table(const std::vector<Table1Row>& rows) {
  Table t;
  t.columns = {"L",
               "reid_walls_closed",
               "reid_walls_fock",
               "reid_walls_printed",
               "reid_walls_abs_diff",
               "ratios_closed",
               "ratios_fock",
               "ratios_two_path_diff",
               "ratios_printed",
               "ratios_abs_diff",
               "ratios_default_settings"};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<long long>(r.L), r.reid_walls_closed, r.reid_walls_fock,
                      r.reid_walls_printed, r.reid_walls_diff(), r.ratios_closed, r.ratios_fock,
                      r.ratios_two_path_diff(), r.ratios_printed, r.ratios_printed_diff(),
                      optional_cell(r.ratios_default_settings)});
  }
  return t;
}

inline Table table2_table(const std::vector<Table2Row>& rows) {
  Table t;
  t.columns = {"L",
               "intensities_direct",
               "intensities_resummed",
               "intensities_printed",
               "intensities_abs_diff",
               "intensities_lhs_path_diff",
               "rates_direct",
               "rates_resummed",
               "rates_printed",
               "rates_abs_diff",
               "rates_lhs_path_diff"};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<long long>(r.L), r.intensities.direct, r.intensities.resummed,
                      r.intensities.printed, r.intensities.printed_diff(),
                      r.intensities.lhs_path_diff, r.rates.direct, r.rates.resummed,
                      r.rates.printed, r.rates.printed_diff(), r.rates.lhs_path_diff});
  }
  return t;
}

inline Table visibility_table(const std::vector<VisibilityRow>& rows) {
  Table t;
  t.columns = {"gamma", "v_new", "v_old", "chsh_threshold"};
  for (const auto& r : rows) t.rows.push_back({r.gamma, r.v_new, r.v_old, r.chsh_threshold});
  return t;
}

inline Table fuzz_table(const FuzzReport& report) {
  Table t;
  t.columns = {"check", "root_seed", "samples", "evaluated", "violations", "worst_margin"};
  for (const auto& c : report.checks) {
    t.rows.push_back({c.name, static_cast<long long>(report.root_seed),
                      static_cast<long long>(report.samples), static_cast<long long>(c.evaluated),
                      static_cast<long long>(c.violations), c.worst_margin});
  }
  return t;
}

}  // namespace bellopt::report
