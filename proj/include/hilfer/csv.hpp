#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hilfer/error.hpp"

namespace hilfer::csv {

/// 17 significant digits; inf and nan spelled so strtod reads them back.
inline std::string number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline Table read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ConfigError, "'" + path + "' is empty");
    t.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw Error(ErrorCode::ConfigError,
                        path + " line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " columns");
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline void write(const std::string& path, const Table& t) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
    out << join(t.header) << "\n";
    for (const auto& r : t.rows) out << join(r) << "\n";
}

}  // namespace hilfer::csv
