#pragma once

// Speech records, time slices and descriptive corpus statistics.

#include <algorithm>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parlshift/csv.hpp"
#include "parlshift/error.hpp"
#include "parlshift/io.hpp"
#include "parlshift/text.hpp"

namespace parlshift {

enum class Gender { female, male, unknown };

inline std::string_view to_string(Gender g) {
    switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    default: return "unknown";
    }
}

inline std::optional<Gender> parse_gender(std::string_view s) {
    s = text::trim(s);
    if (s == "female")
        return Gender::female;
    if (s == "male")
        return Gender::male;
    if (s == "unknown" || s.empty())
        return Gender::unknown;
    return std::nullopt;
}

struct SpeechRecord {
    std::string member_name;
    Date sitting_date{};
    std::string parliamentary_period;
    std::string parliamentary_session;
    std::string parliamentary_sitting;
    std::string political_party;
    std::string government;
    std::string member_region;
    std::vector<std::string> roles;
    Gender member_gender = Gender::unknown;
    std::string speech;

    bool operator==(const SpeechRecord&) const = default;
};

inline const std::vector<std::string>& speech_columns() {
    static const std::vector<std::string> cols = {
        "member_name",   "sitting_date", "parliamentary_period", "parliamentary_session",
        "parliamentary_sitting", "political_party", "government", "member_region",
        "roles",         "member_gender", "speech"};
    return cols;
}

struct RowError {
    std::size_t line = 0;
    std::string message;
};

struct LoadOptions {
    char delimiter = ',';
    // Records dated outside [min_date, max_date] are rejected when set.
    std::optional<Date> min_date;
    std::optional<Date> max_date;
};

// Streams SpeechRecords from a speech table in file order. Malformed rows
// are skipped and collected in errors() with their line numbers.
class SpeechReader {
public:
    SpeechReader(std::istream& in, LoadOptions opts = {}, std::string source = "<speeches>")
        : reader_(in, opts.delimiter, std::move(source)), opts_(opts) {
        auto head = reader_.next();
        if (!head)
            return;
        auto& h = head->fields;
        if (!h.empty() && h[0].rfind("\xEF\xBB\xBF", 0) == 0)
            h[0].erase(0, 3);
        if (h != speech_columns())
            throw ParseError(reader_.source(), head->line, "speech table header does not match the 11-column layout");
    }

    std::optional<SpeechRecord> next() {
        while (auto row = reader_.next()) {
            auto& f = row->fields;
            if (f.size() == 1 && f[0].empty())
                continue;
            if (f.size() != 11) {
                errors_.push_back({row->line, "expected 11 columns, found " + std::to_string(f.size())});
                continue;
            }
            SpeechRecord r;
            if (!parse_date(f[1], r.sitting_date)) {
                errors_.push_back({row->line, "invalid sitting_date '" + f[1] + "'"});
                continue;
            }
            if ((opts_.min_date && r.sitting_date < *opts_.min_date) ||
                (opts_.max_date && r.sitting_date > *opts_.max_date)) {
                errors_.push_back({row->line, "sitting_date out of range '" + f[1] + "'"});
                continue;
            }
            const auto g = parse_gender(f[9]);
            if (!g) {
                errors_.push_back({row->line, "invalid member_gender '" + f[9] + "'"});
                continue;
            }
            if (text::trim(f[10]).empty()) {
                errors_.push_back({row->line, "empty speech"});
                continue;
            }
            r.member_name = std::move(f[0]);
            r.parliamentary_period = std::move(f[2]);
            r.parliamentary_session = std::move(f[3]);
            r.parliamentary_sitting = std::move(f[4]);
            r.political_party = std::move(f[5]);
            r.government = std::move(f[6]);
            r.member_region = std::move(f[7]);
            if (!f[8].empty())
                r.roles = text::split(f[8], ';');
            r.member_gender = *g;
            r.speech = std::move(f[10]);
            return r;
        }
        return std::nullopt;
    }

    const std::vector<RowError>& errors() const noexcept { return errors_; }

private:
    csv::Reader reader_;
    LoadOptions opts_;
    std::vector<RowError> errors_;
};

struct LoadResult {
    std::vector<SpeechRecord> records;
    std::vector<RowError> errors;
};

inline LoadResult load_speeches(std::istream& in, LoadOptions opts = {}, std::string source = "<speeches>") {
    SpeechReader reader(in, opts, std::move(source));
    LoadResult out;
    while (auto r = reader.next())
        out.records.push_back(std::move(*r));
    out.errors = reader.errors();
    return out;
}

inline LoadResult load_speeches(const std::filesystem::path& path, LoadOptions opts = {}) {
    auto in = open_input(path);
    return load_speeches(in, opts, path.string());
}

inline void write_speech_header(std::ostream& out, char delimiter = ',') {
    csv::write_row(out, speech_columns(), delimiter);
}

inline void write_speech(std::ostream& out, const SpeechRecord& r, char delimiter = ',') {
    const std::string date = format_date(r.sitting_date);
    const std::string roles = text::join(r.roles, ";");
    csv::write_row(out,
                   {r.member_name, date, r.parliamentary_period, r.parliamentary_session, r.parliamentary_sitting,
                    r.political_party, r.government, r.member_region, roles, to_string(r.member_gender), r.speech},
                   delimiter);
}

inline void write_speeches(std::ostream& out, const std::vector<SpeechRecord>& records, char delimiter = ',') {
    write_speech_header(out, delimiter);
    for (const auto& r : records)
        write_speech(out, r, delimiter);
}

// ---------------------------------------------------------------------------
// Time slices

struct DateRange {
    Date start;
    Date end;
    bool contains(const Date& d) const { return start <= d && d <= end; }
    bool operator==(const DateRange&) const = default;
};

struct TimeSlice {
    std::string id;
    std::vector<std::string> source_periods;
    std::optional<DateRange> date_range;

    bool operator==(const TimeSlice&) const = default;
};

// Slicing file: one slice per line, "id = period, period | YYYY-MM-DD..YYYY-MM-DD".
// The period list or the date range may be omitted, not both. '#' starts a comment.
inline std::vector<TimeSlice> parse_slicing(std::istream& in, const std::string& source = "<slicing>") {
    std::vector<TimeSlice> slices;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto body = text::trim(line);
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(source, lineno, "expected 'id = periods'");
        TimeSlice s;
        s.id = std::string(text::trim(body.substr(0, eq)));
        if (s.id.empty())
            throw ParseError(source, lineno, "empty slice id");
        auto rest = body.substr(eq + 1);
        std::string_view dates;
        if (auto bar = rest.find('|'); bar != std::string_view::npos) {
            dates = text::trim(rest.substr(bar + 1));
            rest = rest.substr(0, bar);
        }
        for (auto& p : text::split(rest, ',')) {
            auto t = text::trim(p);
            if (!t.empty())
                s.source_periods.emplace_back(t);
        }
        if (!dates.empty()) {
            const auto dots = dates.find("..");
            DateRange r;
            if (dots == std::string_view::npos || !parse_date(dates.substr(0, dots), r.start) ||
                !parse_date(dates.substr(dots + 2), r.end) || r.end < r.start)
                throw ParseError(source, lineno, "bad date range '" + std::string(dates) + "'");
            s.date_range = r;
        }
        if (s.source_periods.empty() && !s.date_range)
            throw ParseError(source, lineno, "slice '" + s.id + "' has neither periods nor a date range");
        slices.push_back(std::move(s));
    }
    return slices;
}

inline void write_slicing(std::ostream& out, const std::vector<TimeSlice>& slices) {
    for (const auto& s : slices) {
        out << s.id << " = " << text::join(s.source_periods, ", ");
        if (s.date_range)
            out << " | " << format_date(s.date_range->start) << ".." << format_date(s.date_range->end);
        out << '\n';
    }
}

// Throws InputError when two slices share an id or a period label.
inline void validate_slicing(const std::vector<TimeSlice>& slices) {
    std::set<std::string> ids, periods;
    for (const auto& s : slices) {
        if (!ids.insert(s.id).second)
            throw InputError("duplicate slice id '" + s.id + "'");
        for (const auto& p : s.source_periods)
            if (!periods.insert(p).second)
                throw InputError("period '" + p + "' assigned to more than one slice");
    }
}

struct SlicedCorpus {
    std::vector<TimeSlice> slices;
    std::vector<std::vector<std::string>> tokens; // aligned with slices
    std::size_t excluded_records = 0;
    std::size_t excluded_tokens = 0;

    const std::vector<std::string>& at(std::string_view id) const {
        for (std::size_t i = 0; i < slices.size(); ++i)
            if (slices[i].id == id)
                return tokens[i];
        throw InputError("unknown slice '" + std::string(id) + "'");
    }
};

// Index of the slice a record belongs to: by period label when the record
// has one, otherwise by sitting date.
inline std::optional<std::size_t> assign_slice(const SpeechRecord& r, const std::vector<TimeSlice>& slices) {
    if (!r.parliamentary_period.empty()) {
        for (std::size_t i = 0; i < slices.size(); ++i)
            for (const auto& p : slices[i].source_periods)
                if (p == r.parliamentary_period)
                    return i;
        return std::nullopt;
    }
    for (std::size_t i = 0; i < slices.size(); ++i)
        if (slices[i].date_range && slices[i].date_range->contains(r.sitting_date))
            return i;
    return std::nullopt;
}

// Concatenates the whitespace-separated tokens of already preprocessed
// speeches per slice, preserving speech order.
inline SlicedCorpus slice_corpus(const std::vector<SpeechRecord>& records, const std::vector<TimeSlice>& slicing) {
    validate_slicing(slicing);
    SlicedCorpus out;
    out.slices = slicing;
    out.tokens.resize(slicing.size());
    for (const auto& r : records) {
        auto words = text::split_words(r.speech);
        if (const auto idx = assign_slice(r, slicing)) {
            auto& dst = out.tokens[*idx];
            dst.insert(dst.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
        } else {
            ++out.excluded_records;
            out.excluded_tokens += words.size();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct CorpusStats {
    std::size_t characters = 0;
    std::size_t tokens = 0;
    std::size_t unique_tokens = 0;
    std::size_t sentences = 0;
    std::size_t unique_sentences = 0;

    bool operator==(const CorpusStats&) const = default;
};

// Sentences are the non-blank pieces of raw_text between full stops;
// characters are Unicode code points.
inline CorpusStats corpus_stats(const std::vector<std::string>& tokens, std::string_view raw_text) {
    CorpusStats s;
    s.characters = text::length(raw_text);
    s.tokens = tokens.size();
    s.unique_tokens = std::unordered_set<std::string_view>(tokens.begin(), tokens.end()).size();
    std::unordered_set<std::string_view> distinct;
    std::size_t start = 0;
    while (start <= raw_text.size()) {
        auto stop = raw_text.find('.', start);
        if (stop == std::string_view::npos)
            stop = raw_text.size();
        const auto piece = text::trim(raw_text.substr(start, stop - start));
        if (!piece.empty()) {
            ++s.sentences;
            distinct.insert(piece);
        }
        start = stop + 1;
    }
    s.unique_sentences = distinct.size();
    return s;
}

struct SharedVocabulary {
    std::set<std::string> shared;
    std::size_t size = 0;
};

inline SharedVocabulary shared_vocabulary(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::unordered_set<std::string_view> in_b(b.begin(), b.end());
    SharedVocabulary out;
    for (const auto& w : a)
        if (in_b.count(w))
            out.shared.insert(w);
    out.size = out.shared.size();
    return out;
}

struct GenderCell {
    std::size_t members_known = 0; // distinct members with known gender
    std::size_t female_members = 0;
    std::size_t characters = 0;
    std::size_t female_characters = 0;
    double member_pct = 0.0;
    double speech_char_pct = 0.0;
};

// Keyed by (party, period). Cells without any member of known gender are
// omitted. Members are counted by head, deduplicated on exact name.
inline std::map<std::pair<std::string, std::string>, GenderCell>
gender_participation(const std::vector<SpeechRecord>& records) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, GenderCell> cells;
    std::map<Key, std::map<std::string, Gender>> members;
    for (const auto& r : records) {
        Key key{r.political_party, r.parliamentary_period};
        auto& cell = cells[key];
        const std::size_t chars = text::length(r.speech);
        cell.characters += chars;
        if (r.member_gender == Gender::female)
            cell.female_characters += chars;
        members[key].emplace(r.member_name, r.member_gender);
    }
    for (auto it = cells.begin(); it != cells.end();) {
        auto& cell = it->second;
        for (const auto& [name, g] : members[it->first]) {
            if (g == Gender::unknown)
                continue;
            ++cell.members_known;
            if (g == Gender::female)
                ++cell.female_members;
        }
        if (cell.members_known == 0) {
            it = cells.erase(it);
            continue;
        }
        cell.member_pct = static_cast<double>(cell.female_members) / static_cast<double>(cell.members_known);
        cell.speech_char_pct = cell.characters == 0 ? 0.0
                                                    : static_cast<double>(cell.female_characters) /
                                                          static_cast<double>(cell.characters);
        ++it;
    }
    return cells;
}

} // namespace parlshift
