#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace kads::cli {

inline constexpr const char* tool_name = "kads-modes";
inline constexpr const char* tool_version = "1.0.0";

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Canonical hash of a configuration: FNV-1a over the key-sorted compact dump.
inline std::string config_hash(const nlohmann::json& j) { return hex64(fnv1a(j.dump())); }

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Cell = std::variant<double, long long, std::string>;

inline std::string format_cell(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return format_double(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

/// CSV with '#' metadata lines, one header row, and %.17g numbers.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }

    std::string str() const {
        std::ostringstream os;
        for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
            os << "\n";
        }
        return os.str();
    }
};

struct ParsedCsv {
    std::map<std::string, std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
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
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv p;
    std::istringstream is(text);
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon != std::string::npos) p.meta[line.substr(2, colon - 2)] = line.substr(colon + 2);
        } else if (!have_header) {
            p.header = split_csv_line(line);
            have_header = true;
        } else if (!line.empty()) {
            p.rows.push_back(split_csv_line(line));
        }
    }
    return p;
}

} // namespace kads::cli
