#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "parlshift/io.hpp"
#include "parlshift/parser.hpp"
#include "parlshift/resolve.hpp"
#include "support.hpp"

using namespace parlshift;
using namespace parlshift::resolve;

namespace {

Date day(const char* s) { return parse_date_or_throw(s, "test"); }

IntervalRow row(std::string name, Gender g, const char* start, const char* end, std::string party = "P") {
    IntervalRow r;
    r.name = std::move(name);
    r.gender = g;
    r.interval.start = day(start);
    r.interval.end = day(end);
    r.interval.party = std::move(party);
    return r;
}

std::u32string random_string(std::mt19937_64& rng, const std::u32string& alphabet, std::size_t max_len) {
    std::u32string s(rng() % (max_len + 1), U' ');
    for (auto& c : s)
        c = alphabet[rng() % alphabet.size()];
    return s;
}

} // namespace

TEST(JaroWinkler, CanonicalPairsMatchOracle) {
    const double martha = support::jaro_winkler(U"MARTHA", U"MARHTA");
    const double dixon = support::jaro_winkler(U"DIXON", U"DICKSONX");
    EXPECT_NEAR(martha, 0.9611, 1e-4);
    EXPECT_NEAR(dixon, 0.8133, 1e-4);
    EXPECT_NEAR(jaro_winkler("MARTHA", "MARHTA"), martha, 1e-12);
    EXPECT_NEAR(jaro_winkler("DIXON", "DICKSONX"), dixon, 1e-12);
}

TEST(JaroWinkler, IdentityAndEmpty) {
    EXPECT_DOUBLE_EQ(jaro_winkler("ΑΒΓ", "ΑΒΓ"), 1.0);
    EXPECT_DOUBLE_EQ(jaro_winkler("", ""), 1.0);
    EXPECT_DOUBLE_EQ(jaro_winkler("", "Α"), 0.0);
    EXPECT_DOUBLE_EQ(jaro_winkler("ΑΒ", "ΓΔ"), 0.0);
}

TEST(JaroWinkler, RandomPairsMatchOracleAndAreSymmetric) {
    std::mt19937_64 rng(11);
    const std::u32string latin = U"ABCDE";
    const std::u32string greek = U"ΑΒΓΔΕΖΗΘΙΚΛΜΝΟΠΡΣΤ";
    for (int i = 0; i < 1000; ++i) {
        const auto& alpha = i % 2 ? greek : latin;
        const auto a = random_string(rng, alpha, 12), b = random_string(rng, alpha, 12);
        const double got = jaro_winkler(a, b);
        ASSERT_NEAR(got, support::jaro_winkler(a, b), 1e-9) << i;
        ASSERT_NEAR(got, jaro_winkler(b, a), 1e-12) << i;
        ASSERT_GE(got, 0.0);
        ASSERT_LE(got, 1.0);
        if (!a.empty() && got == 1.0) {
            ASSERT_EQ(a, b);
        }
    }
}

TEST(Variants, SingleWord) {
    EXPECT_EQ(generate_variants("ΤΑΔΕ").variants, (std::set<std::string>{"ΤΑΔΕ"}));
}

TEST(Variants, TwoWordPermutations) {
    EXPECT_EQ(generate_variants("A B").variants, (std::set<std::string>{"A B", "B A"}));
}

TEST(Variants, NicknamesAndDroppedWords) {
    NicknameTable nick;
    nick.add("ΙΩΑΝΝΗΣ", "ΓΙΑΝΝΗΣ");
    const auto v = generate_variants("ΙΩΑΝΝΗΣ Κ. ΠΑΠΑΣ", nick).variants;
    EXPECT_TRUE(v.count("ΠΑΠΑΣ ΓΙΑΝΝΗΣ"));
    EXPECT_TRUE(v.count("ΙΩΑΝΝΗΣ ΠΑΠΑΣ"));
    EXPECT_TRUE(v.count("ΙΩΑΝΝΗΣ Κ. ΠΑΠΑΣ"));
    EXPECT_TRUE(v.count("ΓΙΑΝΝΗΣ Κ. ΠΑΠΑΣ"));
    for (const auto& s : v)
        EXPECT_GE(text::split_words(s).size(), 2u) << s;
}

TEST(Variants, AllPermutationsPresent) {
    const auto v = generate_variants("A B C D").variants;
    std::vector<std::string> w = {"A", "B", "C", "D"};
    std::size_t perms = 0;
    do {
        EXPECT_TRUE(v.count(text::join(w, " ")));
        ++perms;
    } while (std::next_permutation(w.begin(), w.end()));
    EXPECT_GE(v.size(), perms);
}

TEST(NameCases, GenitiveToNominative) {
    NameCaseTable t;
    t.add("ΙΩΑΝΝΟΥ", "ΙΩΑΝΝΗΣ", Gender::male);
    t.add("ΠΑΠΑ", "ΠΑΠΑΣ", Gender::male);
    const auto n = genitive_to_nominative("ΙΩΑΝΝΟΥ ΠΑΠΑ", t);
    EXPECT_EQ(n.name, "ΙΩΑΝΝΗΣ ΠΑΠΑΣ");
    EXPECT_EQ(n.gender, Gender::male);
    const auto same = genitive_to_nominative("ΙΩΑΝΝΗΣ ΠΑΠΑΣ", t);
    EXPECT_EQ(same.name, "ΙΩΑΝΝΗΣ ΠΑΠΑΣ");
    EXPECT_EQ(same.gender, Gender::male);
    const auto unknown = genitive_to_nominative("ΧΧΧ ΨΨΨ", t);
    EXPECT_EQ(unknown.name, "ΧΧΧ ΨΨΨ");
    EXPECT_EQ(unknown.gender, Gender::unknown);
}

TEST(NameCases, ShippedTableLoads) {
    const auto t = NameCaseTable::read(support::shipped_data("name_cases.csv"));
    ASSERT_TRUE(t.find("ΜΑΡΙΑΣ"));
    EXPECT_EQ(t.find("ΜΑΡΙΑΣ")->gender, Gender::female);
    EXPECT_EQ(t.find("ΜΑΡΙΑ")->nominative, "ΜΑΡΙΑ");
}

TEST(Merge, EmptyInputsGiveEmptyRegistry) {
    EXPECT_TRUE(merge_support_datasets({}).registry.empty());
}

TEST(Merge, SingleSourcePersonUnchanged) {
    SupportDatasets d;
    d.members.push_back(row("ΕΛΕΝΗ ΓΕΩΡΓΙΟΥ", Gender::female, "1996-10-22", "2000-02-14", "ΚΚΕ"));
    const auto r = merge_support_datasets(d).registry;
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].official_name, "ΕΛΕΝΗ ΓΕΩΡΓΙΟΥ");
    EXPECT_EQ(r[0].gender, Gender::female);
    ASSERT_EQ(r[0].intervals.size(), 1u);
    EXPECT_EQ(r[0].intervals[0].party, "ΚΚΕ");
}

TEST(Merge, MemberAndMinisterBecomeOneEntryWithTwoIntervals) {
    NameCaseTable cases;
    cases.add("ΚΩΝΣΤΑΝΤΙΝΟΥ", "ΚΩΝΣΤΑΝΤΙΝΟΣ", Gender::male);
    cases.add("ΠΑΠΑ", "ΠΑΠΑΣ", Gender::male);
    SupportDatasets d;
    d.members.push_back(row("ΚΩΝΣΤΑΝΤΙΝΟΣ ΠΑΠΑΣ", Gender::unknown, "1996-10-22", "2000-02-14", "ΠΑΣΟΚ"));
    auto minister = row("ΚΩΝΣΤΑΝΤΙΝΟΥ ΠΑΠΑ", Gender::unknown, "1998-01-01", "1999-12-31", "ΠΑΣΟΚ");
    minister.interval.roles = {"Υπουργός"};
    d.government_members.push_back(minister);
    const auto r = merge_support_datasets(d, &cases).registry;
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].intervals.size(), 2u);
    EXPECT_EQ(r[0].gender, Gender::male);
    EXPECT_EQ(r[0].at(day("1998-06-01")).roles, (std::vector<std::string>{"Υπουργός"}));
}

TEST(Merge, GovernmentAttachedByDate) {
    SupportDatasets d;
    d.members.push_back(row("ΑΒ ΓΔ", Gender::male, "1996-01-01", "1996-12-31"));
    d.governments.push_back({"Κυβέρνηση Α", day("1996-01-22"), day("1996-09-24")});
    d.governments.push_back({"Κυβέρνηση Β", day("1996-09-25"), day("2000-04-13")});
    const auto r = merge_support_datasets(d).registry;
    ASSERT_EQ(r.size(), 1u);
    ASSERT_EQ(r[0].intervals.size(), 3u);
    EXPECT_EQ(r[0].at(day("1996-01-05")).government, "");
    EXPECT_EQ(r[0].at(day("1996-05-05")).government, "Κυβέρνηση Α");
    EXPECT_EQ(r[0].at(day("1996-12-05")).government, "Κυβέρνηση Β");
}

TEST(Merge, GenderConflictKeepsFirst) {
    SupportDatasets d;
    d.members.push_back(row("ΑΒ ΓΔ", Gender::male, "1996-01-01", "1996-12-31"));
    d.extra_posts.push_back(row("ΑΒ ΓΔ", Gender::female, "1997-01-01", "1997-12-31"));
    const auto m = merge_support_datasets(d);
    EXPECT_EQ(m.registry[0].gender, Gender::male);
    EXPECT_EQ(m.conflicts.size(), 1u);
}

TEST(Merge, IdempotentThroughRegistryFile) {
    const auto reg = read_registry(support::test_data("registry.csv"));
    std::ostringstream out;
    write_registry(out, reg);
    std::istringstream in(out.str());
    const auto again = read_registry(in);
    ASSERT_EQ(again.size(), reg.size());
    for (std::size_t i = 0; i < reg.size(); ++i) {
        EXPECT_EQ(again[i].key, reg[i].key);
        EXPECT_EQ(again[i].gender, reg[i].gender);
        EXPECT_EQ(again[i].intervals, reg[i].intervals);
    }
}

TEST(Resolver, ExactOfficialName) {
    const Resolver res(read_registry(support::test_data("registry.csv")));
    const auto r = res.resolve_name("ΣΟΦΙΑ ΜΑΥΡΙΔΟΥ", day("1998-03-04"));
    ASSERT_TRUE(r);
    EXPECT_EQ(r.member->key, "ΣΟΦΙΑ ΜΑΥΡΙΔΟΥ");
    EXPECT_DOUBLE_EQ(r.similarity, 1.0);
    EXPECT_TRUE(r.dated);
}

TEST(Resolver, EmptyRegistryNeverResolves) {
    const Resolver res({});
    EXPECT_FALSE(res.resolve_name("ΣΟΦΙΑ ΜΑΥΡΙΔΟΥ", day("1998-03-04")));
}

// Mutations of a registry name whose best variant similarity, computed by
// the oracle, falls just below and just above the threshold.
TEST(Resolver, ThresholdBoundaryAgainstOracle) {
    const auto registry = read_registry(support::test_data("registry.csv"));
    const Resolver res(registry);
    std::vector<std::u32string> variants;
    for (const auto& v : generate_variants("ΠΑΝΑΓΙΩΤΗΣ ΚΑΡΑΓΙΑΝΝΗΣ").variants)
        variants.push_back(text::decode(v));
    const auto best_oracle = [&](const std::u32string& q) {
        double best = 0;
        for (const auto& v : variants)
            best = std::max(best, support::jaro_winkler(q, v));
        return best;
    };
    const std::u32string base = U"ΠΑΝΑΓΙΩΤΗΣ ΚΑΡΑΓΙΑΝΝΗΣ";
    const std::u32string letters = U"ΧΨΦΩ";
    std::optional<std::u32string> reject, accept;
    std::optional<double> reject_sim, accept_sim;
    // replace 1..6 trailing letters of the surname
    for (std::size_t n = 1; n <= 8 && !(reject && accept); ++n) {
        for (char32_t c : letters) {
            auto q = base;
            for (std::size_t k = 0; k < n; ++k)
                q[q.size() - 1 - k] = c;
            const double s = best_oracle(q);
            if (!reject && s >= 0.94 && s < 0.95) {
                reject = q;
                reject_sim = s;
            }
            if (!accept && s >= 0.95 && s < 1.0) {
                accept = q;
                accept_sim = s;
            }
        }
    }
    ASSERT_TRUE(reject) << "no mutation scored in [0.94, 0.95)";
    ASSERT_TRUE(accept);
    for (const auto& m : registry) {
        for (const auto& v : generate_variants(m.official_name).variants) {
            if (m.key == "ΠΑΝΑΓΙΩΤΗΣ ΚΑΡΑΓΙΑΝΝΗΣ")
                continue;
            ASSERT_LT(support::jaro_winkler(*reject, text::decode(v)), 0.95);
        }
    }
    EXPECT_FALSE(res.resolve_name(text::encode(*reject), day("1998-03-04"))) << *reject_sim;
    const auto r = res.resolve_name(text::encode(*accept), day("1998-03-04"));
    ASSERT_TRUE(r);
    EXPECT_EQ(r.member->key, "ΠΑΝΑΓΙΩΤΗΣ ΚΑΡΑΓΙΑΝΝΗΣ");
    EXPECT_NEAR(r.similarity, *accept_sim, 1e-12);
}

TEST(Resolver, MisspelledNameResolvesAboveThreshold) {
    const Resolver res(read_registry(support::test_data("registry.csv")));
    const double s = support::jaro_winkler(U"ΝΙΚΟΛΑΟΣ ΠΑΠΑΔΟΠΟΥΛΛΟΣ", U"ΝΙΚΟΛΑΟΣ ΠΑΠΑΔΟΠΟΥΛΟΣ");
    ASSERT_GE(s, 0.95);
    const auto r = res.resolve_name("ΝΙΚΟΛΑΟΣ ΠΑΠΑΔΟΠΟΥΛΛΟΣ", day("1998-03-11"));
    ASSERT_TRUE(r);
    EXPECT_EQ(r.member->key, "ΝΙΚΟΛΑΟΣ ΠΑΠΑΔΟΠΟΥΛΟΣ");
    EXPECT_GE(r.similarity, 0.95);
}

TEST(Resolver, PrefersMemberActiveOnDate) {
    SupportDatasets d;
    d.members.push_back(row("ΙΩΑΝΝΗΣ ΠΑΠΑΣ", Gender::male, "1990-01-01", "1993-12-31"));
    d.members.push_back(row("ΙΩΑΝΝΗΣ ΠΑΠΑΣ ΑΛΦΑ", Gender::male, "1996-01-01", "2000-12-31"));
    const Resolver res(merge_support_datasets(d).registry);
    const auto r = res.resolve_name("ΙΩΑΝΝΗΣ ΠΑΠΑΣ", day("1998-01-01"));
    ASSERT_TRUE(r);
    EXPECT_EQ(r.member->key, "ΙΩΑΝΝΗΣ ΠΑΠΑΣ ΑΛΦΑ");
    EXPECT_TRUE(r.dated);
    const auto undated = res.resolve_name("ΙΩΑΝΝΗΣ ΠΑΠΑΣ", day("2010-01-01"));
    ASSERT_TRUE(undated);
    EXPECT_FALSE(undated.dated);
}

TEST(Resolver, NeverReturnsBelowThreshold) {
    const Resolver res(read_registry(support::test_data("registry.csv")));
    std::mt19937_64 rng(5);
    const std::u32string alpha = U"ΑΒΓΔΕΗΙΚΛΜΝΟΠΡΣΤΥ ";
    for (int i = 0; i < 300; ++i) {
        const auto q = text::encode(random_string(rng, alpha, 24));
        if (const auto r = res.resolve_name(q, day("1998-03-04"))) {
            EXPECT_GE(r.similarity, 0.95);
        }
    }
}

TEST(Resolver, RoleHeaderFallsBackToParenthetical) {
    const Resolver res(read_registry(support::test_data("registry.csv")));
    const auto m = parser::detect_speaker_lines("ΠΡΟΕΔΡΟΣ (Απόστολος Κακλαμάνης): Ορίστε.");
    ASSERT_EQ(m.size(), 1u);
    const auto r = resolve_speaker(m[0], res, day("1998-03-04"));
    ASSERT_TRUE(r);
    EXPECT_EQ(r.member->key, "ΑΠΟΣΤΟΛΟΣ ΚΑΚΛΑΜΑΝΗΣ");
}

TEST(Resolver, FixtureAssignmentsMatchLabels) {
    const Resolver res(read_registry(support::test_data("registry.csv")),
                       NicknameTable::read(support::shipped_data("nicknames.csv")));
    const parser::PatternSet patterns;
    std::map<std::string, std::string> dates;
    {
        std::ifstream in(support::test_data("sittings/index.csv"));
        for (const auto& r : csv::read_table(in, ',', "index").rows)
            dates[r.fields[0]] = r.fields[1];
    }
    std::map<std::string, std::vector<parser::Segment>> parsed;
    for (const auto& l : support::read_labels()) {
        if (!parsed.count(l.file)) {
            parser::RawSitting s{l.file, read_file(support::test_data("sittings/" + l.file)), {}};
            parsed[l.file] = parser::parse_sitting(s, patterns).speeches;
        }
        ASSERT_LT(l.index, parsed[l.file].size());
        const auto r = resolve_speaker(parsed[l.file][l.index].mention, res, day(dates.at(l.file).c_str()));
        EXPECT_EQ(r ? r.member->official_name : std::string(), l.member) << l.file << " #" << l.index << " " << l.raw_header;
    }
}
