#pragma once

// Speaker detection and speech segmentation for plain-text sitting records.
//
// Speaker headers are found with a configurable list of wide-character
// regular expressions. Pattern file grammar (one directive per line):
//
//   # comment
//   role <WORD>          accept a single uppercase word as a speaker header
//   line <regex>         pattern tried at the first non-blank of every line
//   inline <regex>       pattern searched anywhere inside a line
//
// Patterns may use the macros {U} (uppercase letter class body), {WORD}
// (one uppercase name word, hyphenated parts and a trailing dot allowed),
// {NAME} (group 1: two or more words, or a role word) and {PAREN} (group 2:
// closed parenthetical, group 3: parenthetical without closing bracket, cut
// at the colon). A pattern must expose exactly these three groups and no
// others; use (?:...) for grouping. The mention starts at group 1 and ends
// where the pattern match ends (after the colon).

#include <algorithm>
#include <filesystem>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "parlshift/error.hpp"
#include "parlshift/io.hpp"
#include "parlshift/text.hpp"

namespace parlshift::parser {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0; // exclusive, byte offsets into the sitting text
    std::size_t size() const { return end - begin; }
    bool operator==(const Span&) const = default;
};

enum class ParenState { none, closed, unclosed };

struct SpeakerMention {
    std::string raw_name;
    std::optional<std::string> parenthetical;
    ParenState paren_state = ParenState::none;
    Span span;
    bool line_start = true;
};

struct RawSitting {
    std::string file_id;
    std::string text;
    Span intro_span;
};

inline constexpr std::wstring_view default_pattern_config = LR"(# Speaker header patterns.
role ΠΡΟΕΔΡΟΣ
role ΠΡΟΕΔΡΕΥΩΝ
role ΠΡΟΕΔΡΕΥΟΥΣΑ
role ΠΡΟΕΔΡΕΥΟΥΣΕΣ
# NAME (party or role): speech
line {NAME}[ \t]*{PAREN}?[ \t]*:
# speech glued to the end of a previous sentence
inline [.;!)\u00BB\u037E\u0387\u00B7][ \t\u00A0]+{NAME}[ \t]*{PAREN}?[ \t]*:
)";

class PatternSet {
public:
    PatternSet() : PatternSet(std::wstring(default_pattern_config)) {}

    explicit PatternSet(const std::wstring& config, const std::string& source = "<patterns>") {
        std::vector<std::pair<bool, std::wstring>> raw;
        std::wistringstream in(config);
        std::wstring line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto first = line.find_first_not_of(L" \t\r");
            if (first == std::wstring::npos || line[first] == L'#')
                continue;
            auto last = line.find_last_not_of(L" \t\r");
            line = line.substr(first, last - first + 1);
            const auto sp = line.find_first_of(L" \t");
            const std::wstring kind = line.substr(0, sp);
            std::wstring body = sp == std::wstring::npos ? L"" : line.substr(line.find_first_not_of(L" \t", sp));
            if (body.empty())
                throw ParseError(source, lineno, "directive without argument");
            if (kind == L"role")
                roles_.push_back(body);
            else if (kind == L"line")
                raw.emplace_back(true, body);
            else if (kind == L"inline")
                raw.emplace_back(false, body);
            else
                throw ParseError(source, lineno, "unknown directive '" + text::narrow(kind) + "'");
        }
        for (auto& [at_line, body] : raw) {
            std::wregex re;
            try {
                re.assign(expand(body), std::regex::ECMAScript | std::regex::optimize);
            } catch (const std::regex_error& e) {
                throw InputError(source + ": bad pattern '" + text::narrow(body) + "': " + e.what());
            }
            if (re.mark_count() != 3)
                throw InputError(source + ": pattern '" + text::narrow(body) +
                                 "' must contain exactly {NAME} and {PAREN} capture groups");
            (at_line ? line_patterns_ : inline_patterns_).push_back(std::move(re));
        }
        if (line_patterns_.empty() && inline_patterns_.empty())
            throw InputError(source + ": no speaker patterns");
    }

    static PatternSet from_file(const std::filesystem::path& path) {
        const auto bytes = read_file(path);
        return PatternSet(text::widen(bytes).wide, path.string());
    }

    const std::vector<std::wregex>& line_patterns() const { return line_patterns_; }
    const std::vector<std::wregex>& inline_patterns() const { return inline_patterns_; }
    const std::vector<std::wstring>& roles() const { return roles_; }

private:
    std::wstring expand(std::wstring body) const {
        static const std::wstring upper = L"A-ZÀ-ÖØ-ÞΆΈ-ΊΌΎ-ΏΑ-ΡΣ-Ϋ";
        const std::wstring word = L"[" + upper + L"]+(?:-[" + upper + L"]+)*\\.?";
        std::wstring roles;
        for (const auto& r : roles_)
            roles += L"|" + r;
        const std::wstring name = L"((?:" + word + L"(?:[ \t\\u00A0]+" + word + L"){1,7})" + roles + L")";
        const std::wstring paren = L"(?:\\(([^)\n]{0,200})\\)|\\(([^):\n]{0,200}))";
        replace_all(body, L"{NAME}", name);
        replace_all(body, L"{WORD}", word);
        replace_all(body, L"{PAREN}", paren);
        replace_all(body, L"{U}", upper);
        return body;
    }

    static void replace_all(std::wstring& s, std::wstring_view from, const std::wstring& to) {
        for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::wstring::npos; pos += to.size())
            s.replace(pos, from.size(), to);
    }

    std::vector<std::wstring> roles_;
    std::vector<std::wregex> line_patterns_;
    std::vector<std::wregex> inline_patterns_;
};

namespace detail {

inline SpeakerMention make_mention(const text::WideText& w, const std::wsmatch& m,
                                   std::wstring::const_iterator base, bool line_start) {
    SpeakerMention out;
    const auto name_begin = static_cast<std::size_t>(m[1].first - base);
    const auto match_end = static_cast<std::size_t>(m[0].second - base);
    out.raw_name = text::narrow(std::wstring_view(&*m[1].first, static_cast<std::size_t>(m[1].length())));
    if (m[2].matched) {
        out.parenthetical = text::narrow(m[2].str());
        out.paren_state = ParenState::closed;
    } else if (m[3].matched) {
        out.parenthetical = std::string(text::trim(text::narrow(m[3].str())));
        out.paren_state = ParenState::unclosed;
    }
    out.span = {w.offsets[name_begin], w.offsets[match_end]};
    out.line_start = line_start;
    return out;
}

inline bool is_blank(wchar_t c) { return c == L' ' || c == L'\t' || c == L'\r' || c == 0xA0 || c == 0xFEFF; }

} // namespace detail

// Speaker headers in text order. Mentions never overlap. A header found in
// the middle of a line (after sentence punctuation) has line_start=false.
inline std::vector<SpeakerMention> detect_speaker_lines(std::string_view raw, const PatternSet& patterns = {}) {
    const auto w = text::widen(raw);
    const auto& s = w.wide;
    const auto base = s.cbegin();
    std::vector<SpeakerMention> out;
    std::size_t line_begin = 0;
    while (line_begin <= s.size()) {
        std::size_t line_end = s.find(L'\n', line_begin);
        if (line_end == std::wstring::npos)
            line_end = s.size();
        std::size_t cursor = line_begin;
        std::size_t first = line_begin;
        while (first < line_end && detail::is_blank(s[first]))
            ++first;
        if (first < line_end) {
            std::wsmatch m;
            for (const auto& re : patterns.line_patterns()) {
                if (std::regex_search(base + first, base + line_end, m, re, std::regex_constants::match_continuous)) {
                    out.push_back(detail::make_mention(w, m, base, true));
                    cursor = static_cast<std::size_t>(m[0].second - base);
                    break;
                }
            }
        }
        for (;;) {
            std::optional<std::wsmatch> best;
            for (const auto& re : patterns.inline_patterns()) {
                std::wsmatch m;
                const auto flags = cursor > 0 ? std::regex_constants::match_prev_avail
                                              : std::regex_constants::match_default;
                if (!std::regex_search(base + cursor, base + line_end, m, re, flags))
                    continue;
                if (!best || m[1].first < (*best)[1].first)
                    best = m;
            }
            if (!best)
                break;
            out.push_back(detail::make_mention(w, *best, base, false));
            cursor = static_cast<std::size_t>((*best)[0].second - base);
        }
        if (line_end == s.size())
            break;
        line_begin = line_end + 1;
    }
    return out;
}

struct Segment {
    SpeakerMention mention;
    Span speech_span;
    std::string speech; // exact bytes between this mention and the next
    bool empty = false; // nothing but whitespace

    std::string_view trimmed() const { return text::trim(speech); }
};

struct Segmentation {
    Span intro;
    std::vector<Segment> speeches;
};

// Splits the sitting text at the mentions. Text before the first mention
// is the introduction; speech i runs from the end of mention i up to the
// start of mention i+1 or the end of the text.
inline Segmentation segment_speeches(const RawSitting& sitting, const std::vector<SpeakerMention>& mentions) {
    Segmentation out;
    const std::size_t n = sitting.text.size();
    out.intro = {0, mentions.empty() ? n : mentions.front().span.begin};
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < mentions.size(); ++i) {
        const auto& m = mentions[i];
        if (m.span.begin < prev_end || m.span.end > n || m.span.size() == 0)
            throw InputError(sitting.file_id + ": mentions must be sorted, non-overlapping and inside the text");
        prev_end = m.span.end;
        Segment seg;
        seg.mention = m;
        seg.speech_span = {m.span.end, i + 1 < mentions.size() ? mentions[i + 1].span.begin : n};
        if (seg.speech_span.end < seg.speech_span.begin)
            throw InputError(sitting.file_id + ": overlapping mentions");
        seg.speech = sitting.text.substr(seg.speech_span.begin, seg.speech_span.size());
        seg.empty = text::trim(seg.speech).empty();
        out.speeches.push_back(std::move(seg));
    }
    return out;
}

// Detects and segments in one step, filling sitting.intro_span.
inline Segmentation parse_sitting(RawSitting& sitting, const PatternSet& patterns = {}) {
    auto seg = segment_speeches(sitting, detect_speaker_lines(sitting.text, patterns));
    sitting.intro_span = seg.intro;
    return seg;
}

} // namespace parlshift::parser
