#ifndef GHOM_CSV_HPP
#define GHOM_CSV_HPP

// Minimal CSV for experiment outputs. The first line is a versioned comment
//     # ghom-csv v1 key=value ...
// followed by a header row and data rows. Fields never contain commas.

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ghom/error.hpp"

namespace ghom {

inline constexpr int csv_version = 1;

struct CsvTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorKind::Parse, "no column '" + name + "'");
    }
};

// Shortest representation that reads back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline double parse_double(const std::string &s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double x = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw Error(ErrorKind::Parse, "bad number '" + s + "'");
    return x;
}

inline void write_csv(std::ostream &os, const CsvTable &t) {
    os << "# ghom-csv v" << csv_version;
    for (const auto &[k, v] : t.meta) os << ' ' << k << '=' << v;
    os << '\n';
    const auto line = [&os](const std::vector<std::string> &f) {
        for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
        os << '\n';
    };
    line(t.header);
    for (const auto &r : t.rows) line(r);
}

inline CsvTable read_csv(std::istream &is) {
    const auto split = [](const std::string &s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(s);
        while (std::getline(ss, cur, sep)) out.push_back(cur);
        if (!s.empty() && s.back() == sep) out.emplace_back();
        return out;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::Parse, "empty CSV");
    const std::string tag = "# ghom-csv v" + std::to_string(csv_version);
    if (line.rfind(tag, 0) != 0) throw Error(ErrorKind::Parse, "missing or unsupported version line");
    for (const auto &kv : split(line.substr(tag.size()), ' ')) {
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Parse, "bad metadata '" + kv + "'");
        t.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!std::getline(is, line)) throw Error(ErrorKind::Parse, "missing header row");
    t.header = split(line, ',');
    std::size_t lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto row = split(line, ',');
        if (row.size() != t.header.size())
            throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": wrong field count");
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace ghom

#endif // GHOM_CSV_HPP
