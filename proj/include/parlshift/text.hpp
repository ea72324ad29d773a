#pragma once

// UTF-8 helpers and the small slice of Unicode case/accent folding that
// Greek and Latin parliamentary text needs. No ICU: the tables below cover
// Basic Latin, Latin-1, monotonic Greek and basic Cyrillic.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace parlshift::text {

static_assert(sizeof(wchar_t) == 4, "wide strings must hold full code points");

inline constexpr char32_t replacement_char = 0xFFFD;

// Decodes one code point starting at s[i] and advances i. Invalid or
// truncated sequences yield U+FFFD and consume one byte.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return replacement_char;
    }
    if (i + extra >= s.size()) {
        ++i;
        return replacement_char;
    }
    for (int k = 1; k <= extra; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return replacement_char;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += extra + 1;
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::u32string decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();)
        out.push_back(next_code_point(s, i));
    return out;
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps)
        append_utf8(out, c);
    return out;
}

inline std::size_t length(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++n)
        next_code_point(s, i);
    return n;
}

// Wide view of a UTF-8 string plus the byte offset of every wide index
// (offsets.size() == wide.size() + 1), so regex matches on the wide string
// map back onto the original bytes.
struct WideText {
    std::wstring wide;
    std::vector<std::size_t> offsets;
};

inline WideText widen(std::string_view s) {
    WideText w;
    w.wide.reserve(s.size());
    w.offsets.reserve(s.size() + 1);
    for (std::size_t i = 0; i < s.size();) {
        w.offsets.push_back(i);
        w.wide.push_back(static_cast<wchar_t>(next_code_point(s, i)));
    }
    w.offsets.push_back(s.size());
    return w;
}

inline std::string narrow(std::wstring_view w) {
    std::string out;
    for (wchar_t c : w)
        append_utf8(out, static_cast<char32_t>(c));
    return out;
}

inline constexpr bool is_combining_mark(char32_t c) { return c >= 0x300 && c <= 0x36F; }

inline constexpr bool is_letter(char32_t c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))
        return true;
    if (c >= 0xC0 && c <= 0x24F)
        return c != 0xD7 && c != 0xF7;
    if (c == 0x386 || (c >= 0x388 && c <= 0x3FF))
        return c != 0x3A2;
    if (c >= 0x1F00 && c <= 0x1FFF)
        return true;
    return c >= 0x400 && c <= 0x4FF;
}

inline constexpr bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

inline constexpr bool is_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x202F || c == 0x3000;
}

inline constexpr bool is_upper(char32_t c) {
    if (c >= 'A' && c <= 'Z')
        return true;
    if (c >= 0xC0 && c <= 0xDE)
        return c != 0xD7;
    if (c == 0x386 || (c >= 0x388 && c <= 0x38F))
        return c != 0x38B && c != 0x38D;
    if (c >= 0x391 && c <= 0x3AB)
        return c != 0x3A2;
    return c >= 0x400 && c <= 0x42F;
}

inline constexpr char32_t to_upper(char32_t c) {
    if (c >= 'a' && c <= 'z')
        return c - 0x20;
    if (c >= 0xE0 && c <= 0xFE && c != 0xF7)
        return c - 0x20;
    if (c == 0x3C2)
        return 0x3A3;
    if (c >= 0x3B1 && c <= 0x3CB)
        return c - 0x20;
    switch (c) {
    case 0x3AC: return 0x386;
    case 0x3AD: return 0x388;
    case 0x3AE: return 0x389;
    case 0x3AF: return 0x38A;
    case 0x3CC: return 0x38C;
    case 0x3CD: return 0x38E;
    case 0x3CE: return 0x38F;
    default: break;
    }
    if (c >= 0x430 && c <= 0x44F)
        return c - 0x20;
    if (c >= 0x450 && c <= 0x45F)
        return c - 0x50;
    return c;
}

inline constexpr char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z')
        return c + 0x20;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7)
        return c + 0x20;
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2)
        return c + 0x20;
    switch (c) {
    case 0x386: return 0x3AC;
    case 0x388: return 0x3AD;
    case 0x389: return 0x3AE;
    case 0x38A: return 0x3AF;
    case 0x38C: return 0x3CC;
    case 0x38E: return 0x3CD;
    case 0x38F: return 0x3CE;
    default: break;
    }
    if (c >= 0x410 && c <= 0x42F)
        return c + 0x20;
    if (c >= 0x400 && c <= 0x40F)
        return c + 0x50;
    return c;
}

// Base letter of an accented letter; unaccented input is returned as-is.
// Combining marks are not handled here (callers drop them).
inline constexpr char32_t strip_accent(char32_t c) {
    if (c >= 0xC0 && c <= 0xFF) {
        // Latin-1 supplement, indexed from U+00C0.
        constexpr char32_t latin1[64] = {
            'A', 'A', 'A', 'A', 'A', 'A', 0xC6, 'C', 'E', 'E', 'E', 'E', 'I', 'I', 'I', 'I',
            0xD0, 'N', 'O', 'O', 'O', 'O', 'O', 0xD7, 'O', 'U', 'U', 'U', 'U', 'Y', 0xDE, 0xDF,
            'a', 'a', 'a', 'a', 'a', 'a', 0xE6, 'c', 'e', 'e', 'e', 'e', 'i', 'i', 'i', 'i',
            0xF0, 'n', 'o', 'o', 'o', 'o', 'o', 0xF7, 'o', 'u', 'u', 'u', 'u', 'y', 0xFE, 'y'};
        return latin1[c - 0xC0];
    }
    switch (c) {
    case 0x386: return 0x391;
    case 0x388: return 0x395;
    case 0x389: return 0x397;
    case 0x38A: return 0x399;
    case 0x38C: return 0x39F;
    case 0x38E: return 0x3A5;
    case 0x38F: return 0x3A9;
    case 0x390: return 0x3B9;
    case 0x3AA: return 0x399;
    case 0x3AB: return 0x3A5;
    case 0x3AC: return 0x3B1;
    case 0x3AD: return 0x3B5;
    case 0x3AE: return 0x3B7;
    case 0x3AF: return 0x3B9;
    case 0x3B0: return 0x3C5;
    case 0x3CA: return 0x3B9;
    case 0x3CB: return 0x3C5;
    case 0x3CC: return 0x3BF;
    case 0x3CD: return 0x3C5;
    case 0x3CE: return 0x3C9;
    default: return c;
    }
}

inline constexpr bool has_accent(char32_t c) { return is_combining_mark(c) || strip_accent(c) != c; }

enum class Case { keep, upper, lower };

// Accent-free form of s with optional case mapping. Combining marks are
// dropped, so the result may be shorter than the input.
inline std::string fold(std::string_view s, Case mode) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        char32_t c = next_code_point(s, i);
        if (is_combining_mark(c))
            continue;
        c = strip_accent(c);
        if (mode == Case::upper)
            c = to_upper(c);
        else if (mode == Case::lower)
            c = to_lower(c);
        append_utf8(out, c);
    }
    return out;
}

inline std::string strip_accents(std::string_view s) { return fold(s, Case::keep); }

inline std::string to_upper(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();)
        append_utf8(out, to_upper(next_code_point(s, i)));
    return out;
}

// Comparison key for person names: accent-free, uppercase, whitespace runs
// collapsed to one space, trimmed.
inline std::string name_key(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (std::size_t i = 0; i < s.size();) {
        char32_t c = next_code_point(s, i);
        if (is_combining_mark(c))
            continue;
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, to_upper(strip_accent(c)));
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && ws(s.back()))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

inline std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r'))
            ++i;
        const std::size_t start = i;
        while (i < s.size() && !(s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r'))
            ++i;
        if (i > start)
            words.emplace_back(s.substr(start, i - start));
    }
    return words;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace parlshift::text
