#pragma once

#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace wpcn {

inline constexpr const char* kVersion = "1.0.0";

/// A flat result table with a metadata block; serializes to RFC-4180 CSV
/// (metadata as leading `# key = value` comment lines) or to a JSON document
/// ({"meta": ..., "columns": ..., "rows": ...}).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
    std::map<std::string, nlohmann::json> meta;

    void add_row(std::vector<nlohmann::json> cells) { rows.push_back(std::move(cells)); }
};

namespace detail {

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string quoted = "\"";
    for (char ch : cell) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

inline std::string cell_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace detail

inline void write_csv(const Table& table, std::ostream& os) {
    for (const auto& [key, value] : table.meta) {
        os << "# " << key << " = " << detail::cell_text(value) << "\n";
    }
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) os << ',';
        os << detail::csv_escape(table.columns[i]);
    }
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << detail::csv_escape(detail::cell_text(row[i]));
        }
        os << "\n";
    }
}

inline void write_json(const Table& table, std::ostream& os) {
    nlohmann::json doc;
    doc["meta"] = table.meta;
    doc["columns"] = table.columns;
    doc["rows"] = table.rows;
    os << doc.dump(2) << "\n";
}

inline void write_table(const Table& table, const std::string& path, bool as_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    as_json ? write_json(table, out) : write_csv(table, out);
}

}  // namespace wpcn
