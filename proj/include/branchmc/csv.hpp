#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "branchmc/errors.hpp"

namespace branchmc {

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace detail

/// RFC-4180-style CSV: header row, then rows of floats printed with 17
/// significant digits (round-trip exact).
inline void write_csv(const CsvTable& table, std::ostream& os) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) os << ',';
        os << detail::csv_quote(table.columns[i]);
    }
    os << "\r\n";
    char buf[40];
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw argument_error("write_csv: row arity " + std::to_string(row.size()) +
                                 " does not match " + std::to_string(table.columns.size()) +
                                 " columns");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            os << buf;
        }
        os << "\r\n";
    }
}

inline void emit_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) throw io_error("emit_csv: cannot open '" + path + "' for writing");
    write_csv(table, out);
    out.flush();
    if (!out.good()) throw io_error("emit_csv: write to '" + path + "' failed");
}

}  // namespace branchmc
