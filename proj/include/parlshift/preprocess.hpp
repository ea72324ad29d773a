#pragma once

// Text normalization: party tagging, accent removal, token filtering,
// stopword masking, and period merging for time slices.

#include <algorithm>
#include <filesystem>
#include <istream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parlshift/corpus.hpp"
#include "parlshift/csv.hpp"
#include "parlshift/error.hpp"
#include "parlshift/io.hpp"
#include "parlshift/text.hpp"

namespace parlshift::preprocess {

inline constexpr std::string_view stopword_token = "@sw";

namespace detail {

// Accent-free lowercase code point, final sigma folded to medial; one in,
// one out so offsets survive.
inline wchar_t fold_char(wchar_t c) {
    const auto f = text::to_lower(text::strip_accent(static_cast<char32_t>(c)));
    return static_cast<wchar_t>(f == U'\u03C2' ? U'\u03C3' : f);
}

inline std::wstring fold_wide(std::wstring_view s) {
    std::wstring out(s);
    for (auto& c : out)
        c = fold_char(c);
    return out;
}

// Folds a regex source: letters lose accents and case, except ASCII letters
// that follow a backslash (\s, \W, ...).
inline std::wstring fold_pattern(std::wstring_view s) {
    std::wstring out;
    bool escaped = false;
    for (wchar_t c : s) {
        out.push_back(escaped && c < 0x80 ? c : fold_char(c));
        escaped = !escaped && c == L'\\';
    }
    return out;
}

inline bool is_word_char(wchar_t c) {
    return text::is_letter(static_cast<char32_t>(c)) || text::is_digit(static_cast<char32_t>(c));
}

} // namespace detail

// Party name patterns and their abbreviations. Patterns are ECMAScript
// regular expressions matched against accent-free lowercase text, so one
// pattern covers capitalization and accent variants; grammatical cases
// are spelled out with alternation, e.g. "νε(α|ας) δημοκρατι(α|ας)".
class PartyTagTable {
public:
    struct Entry {
        std::string pattern;
        std::string abbreviation;
        std::wregex regex;
    };

    void add(std::string_view pattern, std::string_view abbreviation) {
        const auto p = std::string(text::trim(pattern));
        const auto a = std::string(text::trim(abbreviation));
        if (p.empty() || a.empty())
            throw InputError("party table: empty pattern or abbreviation");
        for (const auto& e : entries_)
            if (e.pattern == p)
                throw InputError("party table: duplicate pattern '" + p + "'");
        Entry e{p, a, {}};
        try {
            e.regex.assign(detail::fold_pattern(text::widen(p).wide), std::regex::ECMAScript);
        } catch (const std::regex_error& err) {
            throw InputError("party table: bad pattern '" + p + "': " + err.what());
        }
        entries_.push_back(std::move(e));
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    // Two columns with a header: pattern, abbreviation.
    static PartyTagTable read(std::istream& in, char delimiter = ',', const std::string& source = "<party table>") {
        PartyTagTable t;
        auto table = csv::read_table(in, delimiter, source);
        for (const auto& row : table.rows) {
            if (row.fields.size() < 2)
                throw ParseError(source, row.line, "expected pattern,abbreviation");
            t.add(row.fields[0], row.fields[1]);
        }
        return t;
    }

    static PartyTagTable read(const std::filesystem::path& path, char delimiter = ',') {
        auto in = open_input(path);
        return read(in, delimiter, path.string());
    }

private:
    std::vector<Entry> entries_;
};

// Replaces each party reference with "@" + abbreviation. Matches must sit
// on word boundaries and may not follow '@', so tagged text is a fixed
// point. Overlaps resolve leftmost first, then longest.
inline std::string tag_party_references(std::string_view input, const PartyTagTable& table) {
    if (table.empty())
        return std::string(input);
    const auto w = text::widen(input);
    const auto folded = detail::fold_wide(w.wide);
    struct Hit {
        std::size_t begin, end, entry;
    };
    std::vector<Hit> hits;
    for (std::size_t e = 0; e < table.entries().size(); ++e) {
        const auto& re = table.entries()[e].regex;
        for (std::wsregex_iterator it(folded.begin(), folded.end(), re), end; it != end; ++it) {
            const auto b = static_cast<std::size_t>(it->position(0));
            const auto l = static_cast<std::size_t>(it->length(0));
            if (l == 0)
                continue;
            const bool left_ok = b == 0 || (!detail::is_word_char(folded[b - 1]) && folded[b - 1] != L'@');
            const bool right_ok = b + l == folded.size() || !detail::is_word_char(folded[b + l]);
            if (left_ok && right_ok)
                hits.push_back({b, b + l, e});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.begin != b.begin)
            return a.begin < b.begin;
        if (a.end != b.end)
            return a.end > b.end;
        return a.entry < b.entry;
    });
    std::string out;
    std::size_t cursor = 0; // wide index
    for (const auto& h : hits) {
        if (h.begin < cursor)
            continue;
        out.append(input.substr(w.offsets[cursor], w.offsets[h.begin] - w.offsets[cursor]));
        out += '@';
        out += table.entries()[h.entry].abbreviation;
        cursor = h.end;
    }
    out.append(input.substr(w.offsets[cursor]));
    return out;
}

struct NormalizeOptions {
    bool lowercase = true;
    std::size_t min_length = 2;
};

// Folds a stopword list the same way speech text is folded.
inline std::unordered_set<std::string> make_stopwords(const std::vector<std::string>& words,
                                                      const NormalizeOptions& opts = {}) {
    std::unordered_set<std::string> out;
    for (const auto& w : words)
        out.insert(text::fold(text::trim(w), opts.lowercase ? text::Case::lower : text::Case::keep));
    return out;
}

inline std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path,
                                                      const NormalizeOptions& opts = {}) {
    return make_stopwords(read_list_file(path), opts);
}

// Accents removed (and case folded), punctuation other than full stops
// removed, a run of full stops emitted as one "." token, stopwords
// replaced by "@sw", then tokens shorter than min_length code points
// dropped ("." and "@"-tags are kept). Stopwords are expected in folded form
// (see make_stopwords).
inline std::vector<std::string> normalize_tokens(std::string_view input,
                                                 const std::unordered_set<std::string>& stopwords,
                                                 const NormalizeOptions& opts = {}) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t current_len = 0;
    const auto flush = [&] {
        if (current.empty())
            return;
        if (stopwords.count(current))
            tokens.emplace_back(stopword_token);
        else if (current.front() == '@' || current_len >= opts.min_length)
            tokens.push_back(current);
        current.clear();
        current_len = 0;
    };
    const std::u32string cps = text::decode(input);
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t c = cps[i];
        if (text::is_combining_mark(c))
            continue;
        c = text::strip_accent(c);
        if (opts.lowercase)
            c = text::to_lower(c);
        if (text::is_letter(c) || text::is_digit(c)) {
            text::append_utf8(current, c);
            ++current_len;
        } else if (c == '@' && current.empty() && i + 1 < cps.size() && text::is_letter(cps[i + 1])) {
            current.push_back('@');
            ++current_len;
        } else if (c == '.') {
            flush();
            if (tokens.empty() || tokens.back() != ".")
                tokens.emplace_back(".");
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

// ---------------------------------------------------------------------------
// Period merging

using MergeMap = std::vector<std::pair<std::string, std::string>>; // source period -> target period

// "5:7,6:7" style list.
inline MergeMap parse_merge_map(std::string_view list) {
    MergeMap out;
    for (const auto& item : text::split(list, ',')) {
        const auto t = text::trim(item);
        if (t.empty())
            continue;
        const auto colon = t.find(':');
        if (colon == std::string_view::npos)
            throw InputError("merge map entry '" + std::string(t) + "' is not source:target");
        out.emplace_back(text::trim(t.substr(0, colon)), text::trim(t.substr(colon + 1)));
    }
    return out;
}

// Folds the slice holding each source period into the slice holding its
// target period. The merged slice keeps the target's id and position, its
// periods in original slice order, and the envelope of both date ranges.
inline std::vector<TimeSlice> merge_periods(const std::vector<TimeSlice>& slicing, const MergeMap& merges) {
    validate_slicing(slicing);
    const auto find = [&](const std::string& period) {
        for (std::size_t i = 0; i < slicing.size(); ++i)
            for (const auto& p : slicing[i].source_periods)
                if (p == period)
                    return i;
        throw InputError("merge map refers to unknown period '" + period + "'");
    };
    std::vector<std::size_t> owner(slicing.size());
    std::iota(owner.begin(), owner.end(), 0);
    const auto root = [&](std::size_t i) {
        while (owner[i] != i)
            i = owner[i];
        return i;
    };
    for (const auto& [src, dst] : merges) {
        if (src == dst)
            throw InputError("period '" + src + "' cannot be merged into itself");
        const auto a = root(find(src));
        const auto b = root(find(dst));
        if (a != b)
            owner[a] = b;
    }
    std::vector<TimeSlice> out;
    for (std::size_t i = 0; i < slicing.size(); ++i) {
        if (root(i) != i)
            continue;
        TimeSlice merged = slicing[i];
        merged.source_periods.clear();
        for (std::size_t j = 0; j < slicing.size(); ++j) {
            if (root(j) != i)
                continue;
            const auto& s = slicing[j];
            merged.source_periods.insert(merged.source_periods.end(), s.source_periods.begin(), s.source_periods.end());
            if (s.date_range) {
                if (!merged.date_range)
                    merged.date_range = s.date_range;
                merged.date_range->start = std::min(merged.date_range->start, s.date_range->start);
                merged.date_range->end = std::max(merged.date_range->end, s.date_range->end);
            }
        }
        out.push_back(std::move(merged));
    }
    return out;
}

} // namespace parlshift::preprocess
