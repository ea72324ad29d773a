#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "parlshift/error.hpp"
#include "parlshift/text.hpp"

namespace parlshift {

using Date = std::chrono::year_month_day;

// Parses YYYY-MM-DD. Returns false for malformed or impossible dates.
inline bool parse_date(std::string_view s, Date& out) {
    s = text::trim(s);
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        return false;
    const std::string buf(s);
    if (std::sscanf(buf.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
        return false;
    out = Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    return out.ok();
}

inline Date parse_date_or_throw(std::string_view s, const std::string& context) {
    Date d;
    if (!parse_date(s, d))
        throw InputError(context + ": invalid date '" + std::string(s) + "'");
    return d;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Non-empty, non-comment ('#') lines with surrounding whitespace removed.
inline std::vector<std::string> read_list_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        lines.emplace_back(t);
    }
    return lines;
}

// FNV-1a 64-bit, used for input fingerprints and matrix hashes.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace parlshift
