#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mvh/common.hpp"

namespace mvh {

/// One typed table cell. Numbers serialize with 17 significant digits in
/// both CSV and JSON, so the two formats carry identical numeric content.
struct Cell {
    enum class Type { Number, Integer, Text, Boolean };
    Type type = Type::Text;
    double num = 0.0;
    long long integer = 0;
    std::string text;
    bool flag = false;

    static Cell number(double v) {
        Cell c;
        c.type = Type::Number;
        c.num = v;
        return c;
    }
    static Cell count(long long v) {
        Cell c;
        c.type = Type::Integer;
        c.integer = v;
        return c;
    }
    static Cell string(std::string v) {
        Cell c;
        c.type = Type::Text;
        c.text = std::move(v);
        return c;
    }
    static Cell boolean(bool v) {
        Cell c;
        c.type = Type::Boolean;
        c.flag = v;
        return c;
    }

    std::string csv() const {
        switch (type) {
            case Type::Number: return format17(num);
            case Type::Integer: return std::to_string(integer);
            case Type::Text: return text;
            case Type::Boolean: return flag ? "true" : "false";
        }
        return "";
    }
    std::string json() const {
        switch (type) {
            case Type::Number: return format17(num);
            case Type::Integer: return std::to_string(integer);
            case Type::Text: {
                std::string out = "\"";
                for (char c : text) {
                    if (c == '"' || c == '\\') out.push_back('\\');
                    out.push_back(c);
                }
                out += "\"";
                return out;
            }
            case Type::Boolean: return flag ? "true" : "false";
        }
        return "null";
    }
};

/// Deterministic result table with a '#'-prefixed provenance header.
struct ResultTable {
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_provenance(std::string key, std::string value) {
        provenance.emplace_back(std::move(key), std::move(value));
    }

    void write_csv(std::ostream& out) const {
        for (const auto& [k, v] : provenance) out << "# " << k << "=" << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << columns[i];
        out << "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << row[i].csv();
            out << "\n";
        }
    }

    void write_json(std::ostream& out) const {
        out << "{\n  \"provenance\": {";
        for (std::size_t i = 0; i < provenance.size(); ++i) {
            out << (i ? ", " : "") << "\"" << provenance[i].first << "\": \""
                << provenance[i].second << "\"";
        }
        out << "},\n  \"columns\": [";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? ", " : "") << "\"" << columns[i] << "\"";
        out << "],\n  \"rows\": [\n";
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out << "    [";
            for (std::size_t i = 0; i < rows[r].size(); ++i)
                out << (i ? ", " : "") << rows[r][i].json();
            out << "]" << (r + 1 < rows.size() ? "," : "") << "\n";
        }
        out << "  ]\n}\n";
    }
};

} // namespace mvh
