#pragma once

// Entity resolution: matching raw speaker mentions to a member registry.

#include <algorithm>
#include <filesystem>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "parlshift/corpus.hpp"
#include "parlshift/csv.hpp"
#include "parlshift/error.hpp"
#include "parlshift/io.hpp"
#include "parlshift/parser.hpp"
#include "parlshift/text.hpp"

namespace parlshift::resolve {

// Jaro-Winkler similarity over code points. Matching window is
// floor(max(|a|,|b|)/2) - 1, prefix boost 0.1 per shared leading code
// point, at most 4. Two empty strings are identical (1.0).
inline double jaro_winkler(std::u32string_view a, std::u32string_view b) {
    if (a.empty() && b.empty())
        return 1.0;
    if (a.empty() || b.empty())
        return 0.0;
    const std::size_t la = a.size(), lb = b.size();
    const std::size_t longer = std::max(la, lb);
    const std::size_t window = longer / 2 > 0 ? longer / 2 - 1 : 0;
    std::vector<char> used_a(la, 0), used_b(lb, 0);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < la; ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(i + window + 1, lb);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!used_b[j] && a[i] == b[j]) {
                used_a[i] = used_b[j] = 1;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0)
        return 0.0;
    std::size_t half_transpositions = 0;
    for (std::size_t i = 0, j = 0; i < la; ++i) {
        if (!used_a[i])
            continue;
        while (!used_b[j])
            ++j;
        if (a[i] != b[j])
            ++half_transpositions;
        ++j;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(half_transpositions) / 2.0;
    const double jaro = (m / static_cast<double>(la) + m / static_cast<double>(lb) + (m - t) / m) / 3.0;
    std::size_t prefix = 0;
    while (prefix < 4 && prefix < la && prefix < lb && a[prefix] == b[prefix])
        ++prefix;
    return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

inline double jaro_winkler(std::string_view a, std::string_view b) {
    return jaro_winkler(text::decode(a), text::decode(b));
}

inline std::size_t common_prefix(std::u32string_view a, std::u32string_view b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n])
        ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Name tables

// Groups of interchangeable first names (e.g. a formal name and its
// nicknames). Lookups use name_key().
class NicknameTable {
public:
    void add(std::string_view name, std::string_view nickname) {
        const auto a = text::name_key(name), b = text::name_key(nickname);
        if (a.empty() || b.empty() || a == b)
            return;
        alternatives_[a].insert(b);
        alternatives_[b].insert(a);
    }

    // The word itself followed by its alternatives, all in key form.
    std::vector<std::string> choices(std::string_view word_key) const {
        std::vector<std::string> out{std::string(word_key)};
        if (auto it = alternatives_.find(std::string(word_key)); it != alternatives_.end())
            out.insert(out.end(), it->second.begin(), it->second.end());
        return out;
    }

    std::size_t size() const { return alternatives_.size(); }

    // Two columns: name, nickname. A header row is expected.
    static NicknameTable read(std::istream& in, const std::string& source = "<nicknames>") {
        NicknameTable t;
        auto table = csv::read_table(in, ',', source);
        for (const auto& row : table.rows) {
            if (row.fields.size() < 2)
                throw ParseError(source, row.line, "expected name,nickname");
            t.add(row.fields[0], row.fields[1]);
        }
        return t;
    }

    static NicknameTable read(const std::filesystem::path& path) {
        auto in = open_input(path);
        return read(in, path.string());
    }

private:
    std::map<std::string, std::set<std::string>> alternatives_;
};

struct NameVariantSet {
    std::string canonical;
    std::set<std::string> variants;
};

// All spellings under which an official name may appear: every subset of
// its words keeping at least two (one for single-word names), in every
// order, with each word optionally replaced by a nickname. Names longer
// than six words only get order-preserving and reversed subsets.
inline NameVariantSet generate_variants(std::string_view official_name, const NicknameTable& nicknames = {}) {
    NameVariantSet out;
    out.canonical = text::name_key(official_name);
    out.variants.insert(out.canonical);
    const auto words = text::split_words(out.canonical);
    const std::size_t n = words.size();
    if (n == 0)
        return out;
    std::vector<std::vector<std::string>> choices;
    for (const auto& w : words)
        choices.push_back(nicknames.choices(w));
    const std::size_t min_keep = n >= 2 ? 2 : 1;
    const bool full_permutations = n <= 6;

    std::vector<std::size_t> picked;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        picked.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                picked.push_back(i);
        if (picked.size() < min_keep)
            continue;
        // odometer over nickname choices of the picked words
        std::vector<std::size_t> pick_choice(picked.size(), 0);
        for (;;) {
            std::vector<std::string> chosen;
            for (std::size_t k = 0; k < picked.size(); ++k)
                chosen.push_back(choices[picked[k]][pick_choice[k]]);
            if (full_permutations) {
                std::vector<std::size_t> order(chosen.size());
                std::iota(order.begin(), order.end(), 0);
                do {
                    std::vector<std::string> seq;
                    for (auto o : order)
                        seq.push_back(chosen[o]);
                    out.variants.insert(text::join(seq, " "));
                } while (std::next_permutation(order.begin(), order.end()));
            } else {
                out.variants.insert(text::join(chosen, " "));
                std::reverse(chosen.begin(), chosen.end());
                out.variants.insert(text::join(chosen, " "));
            }
            std::size_t k = 0;
            while (k < picked.size() && ++pick_choice[k] == choices[picked[k]].size())
                pick_choice[k++] = 0;
            if (k == picked.size())
                break;
        }
    }
    return out;
}

// Maps inflected name forms (e.g. genitive) to the nominative and the
// gender it implies. Every nominative maps to itself.
class NameCaseTable {
public:
    struct Entry {
        std::string nominative;
        Gender gender = Gender::unknown;
    };

    void add(std::string_view form, std::string_view nominative, Gender gender) {
        const auto nom = text::name_key(nominative);
        entries_.try_emplace(text::name_key(form), Entry{nom, gender});
        entries_.try_emplace(nom, Entry{nom, gender});
    }

    const Entry* find(std::string_view word) const {
        auto it = entries_.find(text::name_key(word));
        return it == entries_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, Entry>& entries() const { return entries_; }

    // Columns: form, nominative, gender.
    static NameCaseTable read(std::istream& in, const std::string& source = "<name cases>") {
        NameCaseTable t;
        auto table = csv::read_table(in, ',', source);
        for (const auto& row : table.rows) {
            if (row.fields.size() < 3)
                throw ParseError(source, row.line, "expected form,nominative,gender");
            const auto g = parse_gender(row.fields[2]);
            if (!g)
                throw ParseError(source, row.line, "bad gender '" + row.fields[2] + "'");
            t.add(row.fields[0], row.fields[1], *g);
        }
        return t;
    }

    static NameCaseTable read(const std::filesystem::path& path) {
        auto in = open_input(path);
        return read(in, path.string());
    }

private:
    std::map<std::string, Entry> entries_;
};

struct NominativeName {
    std::string name;
    Gender gender = Gender::unknown;
};

// Word-by-word conversion. Unknown words pass through unchanged; the
// gender is that of the first word whose gender the table knows.
inline NominativeName genitive_to_nominative(std::string_view name, const NameCaseTable& table) {
    NominativeName out;
    std::vector<std::string> words;
    for (auto& w : text::split_words(name)) {
        if (const auto* e = table.find(w)) {
            words.push_back(e->nominative);
            if (out.gender == Gender::unknown)
                out.gender = e->gender;
        } else {
            words.push_back(std::move(w));
        }
    }
    out.name = text::join(words, " ");
    return out;
}

// ---------------------------------------------------------------------------
// Registry

struct Interval {
    Date start{};
    Date end{};
    std::string party;
    std::string region;
    std::vector<std::string> roles;
    std::string government;

    bool contains(const Date& d) const { return start <= d && d <= end; }
    auto operator<=>(const Interval&) const = default;
};

struct MemberSnapshot {
    std::string party;
    std::string region;
    std::vector<std::string> roles;
    std::string government;
};

struct MemberEntry {
    std::string official_name;
    std::string key; // name_key(official_name), the entry id
    Gender gender = Gender::unknown;
    std::vector<Interval> intervals;

    bool active_on(const Date& d) const {
        return std::any_of(intervals.begin(), intervals.end(), [&](const Interval& i) { return i.contains(d); });
    }

    // Party, region, roles and government on a date, combined over all
    // intervals that contain it.
    MemberSnapshot at(const Date& d) const {
        MemberSnapshot s;
        for (const auto& i : intervals) {
            if (!i.contains(d))
                continue;
            if (s.party.empty())
                s.party = i.party;
            if (s.region.empty())
                s.region = i.region;
            if (s.government.empty())
                s.government = i.government;
            for (const auto& r : i.roles)
                if (std::find(s.roles.begin(), s.roles.end(), r) == s.roles.end())
                    s.roles.push_back(r);
        }
        return s;
    }
};

struct IntervalRow {
    std::string name;
    Gender gender = Gender::unknown;
    Interval interval;
};

struct Government {
    std::string name;
    Date start{};
    Date end{};
};

struct SupportDatasets {
    std::vector<IntervalRow> members;
    std::vector<IntervalRow> government_members; // names may be inflected
    std::vector<Government> governments;
    std::vector<IntervalRow> extra_posts;
};

namespace detail {

inline std::string field(const csv::Table& t, const csv::Row& row, std::string_view column) {
    const auto idx = t.column(column);
    return idx == csv::Table::npos || idx >= row.fields.size() ? std::string{} : row.fields[idx];
}

inline void require_columns(const csv::Table& t, std::initializer_list<std::string_view> cols,
                            const std::string& source) {
    for (auto c : cols)
        if (t.column(c) == csv::Table::npos)
            throw ParseError(source, 1, "missing column '" + std::string(c) + "'");
}

} // namespace detail

// Interval tables share one layout: name, start, end are required; gender,
// party, region, roles (';'-joined), role and government are optional.
inline std::vector<IntervalRow> read_interval_rows(std::istream& in, const std::string& source) {
    auto t = csv::read_table(in, ',', source);
    std::vector<IntervalRow> rows;
    if (t.header.empty())
        return rows;
    detail::require_columns(t, {"name", "start", "end"}, source);
    for (const auto& row : t.rows) {
        IntervalRow r;
        r.name = std::string(text::trim(detail::field(t, row, "name")));
        if (r.name.empty())
            throw ParseError(source, row.line, "empty name");
        auto& iv = r.interval;
        if (!parse_date(detail::field(t, row, "start"), iv.start) || !parse_date(detail::field(t, row, "end"), iv.end))
            throw ParseError(source, row.line, "invalid start/end date");
        if (iv.end < iv.start)
            throw ParseError(source, row.line, "interval ends before it starts");
        const auto g = parse_gender(detail::field(t, row, "gender"));
        if (!g)
            throw ParseError(source, row.line, "bad gender");
        r.gender = *g;
        iv.party = detail::field(t, row, "party");
        iv.region = detail::field(t, row, "region");
        iv.government = detail::field(t, row, "government");
        if (auto roles = detail::field(t, row, "roles"); !roles.empty())
            iv.roles = text::split(roles, ';');
        if (auto role = detail::field(t, row, "role"); !role.empty())
            iv.roles.push_back(role);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<IntervalRow> read_interval_rows(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_interval_rows(in, path.string());
}

inline std::vector<Government> read_governments(std::istream& in, const std::string& source) {
    auto t = csv::read_table(in, ',', source);
    std::vector<Government> out;
    if (t.header.empty())
        return out;
    detail::require_columns(t, {"name", "start", "end"}, source);
    for (const auto& row : t.rows) {
        Government g;
        g.name = detail::field(t, row, "name");
        if (!parse_date(detail::field(t, row, "start"), g.start) || !parse_date(detail::field(t, row, "end"), g.end) ||
            g.end < g.start)
            throw ParseError(source, row.line, "invalid government dates");
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<Government> read_governments(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_governments(in, path.string());
}

namespace detail {

inline Date add_days(const Date& d, int n) {
    return Date{std::chrono::sys_days{d} + std::chrono::days{n}};
}

// Splits an interval without a government at government boundaries.
inline std::vector<Interval> attach_governments(const Interval& iv, const std::vector<Government>& govs) {
    if (!iv.government.empty() || govs.empty())
        return {iv};
    std::vector<Interval> out;
    Date cursor = iv.start;
    std::vector<const Government*> sorted;
    for (const auto& g : govs)
        if (g.end >= iv.start && g.start <= iv.end)
            sorted.push_back(&g);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->start < b->start; });
    for (const auto* g : sorted) {
        if (g->end < cursor)
            continue;
        if (g->start > cursor) {
            Interval gap = iv;
            gap.start = cursor;
            gap.end = std::min(add_days(g->start, -1), iv.end);
            out.push_back(gap);
            cursor = add_days(gap.end, 1);
        }
        if (cursor > iv.end)
            break;
        Interval piece = iv;
        piece.start = cursor;
        piece.end = std::min(g->end, iv.end);
        piece.government = g->name;
        out.push_back(piece);
        cursor = add_days(piece.end, 1);
        if (cursor > iv.end)
            break;
    }
    if (cursor <= iv.end) {
        Interval tail = iv;
        tail.start = cursor;
        out.push_back(tail);
    }
    return out;
}

} // namespace detail

struct MergeResult {
    std::vector<MemberEntry> registry; // sorted by key
    std::vector<std::string> conflicts;
};

// One entry per person keyed by the nominative name. Intervals from all
// sources are unioned (exact duplicates collapse) and split at government
// boundaries. Inflected government-member names are converted when a case
// table is given; it also supplies missing genders. On a gender conflict
// the first value wins and the conflict is reported.
inline MergeResult merge_support_datasets(const SupportDatasets& in, const NameCaseTable* cases = nullptr) {
    std::map<std::string, MemberEntry> by_key;
    MergeResult result;
    const auto absorb = [&](const IntervalRow& row, bool inflected) {
        std::string name = row.name;
        Gender gender = row.gender;
        if (cases) {
            const auto nom = genitive_to_nominative(name, *cases);
            if (inflected)
                name = nom.name;
            if (gender == Gender::unknown)
                gender = nom.gender;
        }
        const auto key = text::name_key(name);
        auto [it, inserted] = by_key.try_emplace(key);
        auto& e = it->second;
        if (inserted) {
            e.official_name = name;
            e.key = key;
        }
        if (gender != Gender::unknown) {
            if (e.gender == Gender::unknown)
                e.gender = gender;
            else if (e.gender != gender)
                result.conflicts.push_back("gender conflict for " + key + ": kept " + std::string(to_string(e.gender)) +
                                           ", ignored " + std::string(to_string(gender)));
        }
        for (auto& piece : detail::attach_governments(row.interval, in.governments))
            e.intervals.push_back(std::move(piece));
    };
    for (const auto& r : in.members)
        absorb(r, false);
    for (const auto& r : in.government_members)
        absorb(r, true);
    for (const auto& r : in.extra_posts)
        absorb(r, false);
    for (auto& [key, e] : by_key) {
        std::sort(e.intervals.begin(), e.intervals.end());
        e.intervals.erase(std::unique(e.intervals.begin(), e.intervals.end()), e.intervals.end());
        result.registry.push_back(std::move(e));
    }
    return result;
}

// Registry file: one row per interval.
inline void write_registry(std::ostream& out, const std::vector<MemberEntry>& registry) {
    csv::write_row(out, {"name", "gender", "start", "end", "party", "region", "roles", "government"});
    for (const auto& e : registry)
        for (const auto& iv : e.intervals)
            csv::write_row(out, {e.official_name, to_string(e.gender), format_date(iv.start), format_date(iv.end),
                                 iv.party, iv.region, text::join(iv.roles, ";"), iv.government});
}

inline std::vector<MemberEntry> read_registry(std::istream& in, const std::string& source = "<registry>") {
    SupportDatasets d;
    d.members = read_interval_rows(in, source);
    return merge_support_datasets(d).registry;
}

inline std::vector<MemberEntry> read_registry(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_registry(in, path.string());
}

// ---------------------------------------------------------------------------
// Resolution

struct Resolution {
    const MemberEntry* member = nullptr;
    double similarity = 0.0;
    std::string matched_variant;
    bool dated = false; // member was active on the sitting date

    explicit operator bool() const { return member != nullptr; }
};

struct ResolveOptions {
    double threshold = 0.95;
};

// Holds the registry with precomputed name variants. Immutable after
// construction; resolve() is safe to call from several threads.
class Resolver {
public:
    Resolver(std::vector<MemberEntry> registry, const NicknameTable& nicknames = {}, ResolveOptions opts = {})
        : registry_(std::move(registry)), opts_(opts) {
        variants_.resize(registry_.size());
        for (std::size_t i = 0; i < registry_.size(); ++i)
            for (const auto& v : generate_variants(registry_[i].official_name, nicknames).variants)
                variants_[i].push_back(text::decode(v));
    }

    const std::vector<MemberEntry>& registry() const { return registry_; }
    double threshold() const { return opts_.threshold; }

    // Best entry whose best variant scores >= threshold. Entries active on
    // the date are preferred; if none qualifies the date filter is dropped.
    // Ties: longer common prefix with the variant, then smaller entry key.
    Resolution resolve_name(std::string_view name, const Date& date) const {
        const auto query = text::decode(text::name_key(name));
        if (query.empty())
            return {};
        struct Candidate {
            std::size_t index;
            double sim;
            std::size_t prefix;
            std::size_t variant;
        };
        std::vector<Candidate> passing;
        for (std::size_t i = 0; i < registry_.size(); ++i) {
            Candidate best{i, -1.0, 0, 0};
            for (std::size_t v = 0; v < variants_[i].size(); ++v) {
                const double s = jaro_winkler(query, variants_[i][v]);
                const std::size_t p = common_prefix(query, variants_[i][v]);
                if (s > best.sim || (s == best.sim && p > best.prefix))
                    best = {i, s, p, v};
            }
            if (best.sim >= opts_.threshold)
                passing.push_back(best);
        }
        const auto better = [&](const Candidate& a, const Candidate& b) {
            if (a.sim != b.sim)
                return a.sim > b.sim;
            if (a.prefix != b.prefix)
                return a.prefix > b.prefix;
            return registry_[a.index].key < registry_[b.index].key;
        };
        const Candidate* pick = nullptr;
        bool dated = false;
        for (const auto& c : passing)
            if (registry_[c.index].active_on(date) && (!pick || better(c, *pick)))
                pick = &c;
        if (pick) {
            dated = true;
        } else {
            for (const auto& c : passing)
                if (!pick || better(c, *pick))
                    pick = &c;
        }
        if (!pick)
            return {};
        Resolution r;
        r.member = &registry_[pick->index];
        r.similarity = pick->sim;
        r.matched_variant = text::encode(variants_[pick->index][pick->variant]);
        r.dated = dated;
        return r;
    }

private:
    std::vector<MemberEntry> registry_;
    std::vector<std::vector<std::u32string>> variants_;
    ResolveOptions opts_;
};

// Resolves the mention's name; when that fails and the header carries a
// parenthetical (chairs are announced as "ROLE (Name Surname):"), the
// parenthetical is tried as a name.
inline Resolution resolve_speaker(const parser::SpeakerMention& mention, const Resolver& resolver, const Date& date) {
    if (auto r = resolver.resolve_name(mention.raw_name, date))
        return r;
    if (mention.parenthetical)
        return resolver.resolve_name(*mention.parenthetical, date);
    return {};
}

} // namespace parlshift::resolve
