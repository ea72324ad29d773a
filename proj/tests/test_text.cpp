#include <gtest/gtest.h>

#include <sstream>

#include "parlshift/csv.hpp"
#include "parlshift/io.hpp"
#include "parlshift/text.hpp"

using namespace parlshift;

TEST(Text, DecodeEncodeRoundTrip) {
    const std::string s = "Βουλή των Ελλήνων, café 1998";
    EXPECT_EQ(text::encode(text::decode(s)), s);
    EXPECT_EQ(text::length("αβγ"), 3u);
    EXPECT_EQ(text::length(""), 0u);
}

TEST(Text, TruncatedSequenceBecomesReplacement) {
    const std::string s = "a\xCE";
    const auto cps = text::decode(s);
    ASSERT_EQ(cps.size(), 2u);
    EXPECT_EQ(cps[1], text::replacement_char);
}

TEST(Text, AccentFoldingGreek) {
    EXPECT_EQ(text::strip_accents("άέήίόύώΐΰϊϋ"), "αεηιουωιυιυ");
    EXPECT_EQ(text::strip_accents("ΆΈΉΊΌΎΏΪΫ"), "ΑΕΗΙΟΥΩΙΥ");
    EXPECT_EQ(text::fold("Νέα Δημοκρατία", text::Case::lower), "νεα δημοκρατια");
    EXPECT_EQ(text::fold("Νέα Δημοκρατία", text::Case::upper), "ΝΕΑ ΔΗΜΟΚΡΑΤΙΑ");
}

TEST(Text, FinalSigmaUppercases) {
    EXPECT_EQ(text::to_upper("νόμος"), "ΝΌΜΟΣ");
}

TEST(Text, NameKeyNormalizes) {
    EXPECT_EQ(text::name_key("  Απόστολος   Κακλαμάνης "), "ΑΠΟΣΤΟΛΟΣ ΚΑΚΛΑΜΑΝΗΣ");
    EXPECT_EQ(text::name_key("ΝΙΚΟΛΑΪΔΗΣ"), "ΝΙΚΟΛΑΙΔΗΣ");
}

TEST(Text, SplitAndJoin) {
    EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
    EXPECT_EQ(text::split_words(" a  b\tc "), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(text::join({"x", "y"}, "; "), "x; y");
}

TEST(Csv, QuotedFieldsAndEmbeddedNewlines) {
    std::istringstream in("a,b\n\"x, y\",\"line1\nline2\"\n\"q\"\"uote\",z\n");
    csv::Reader r(in, ',', "t");
    auto h = r.next();
    ASSERT_TRUE(h);
    auto r1 = r.next();
    ASSERT_TRUE(r1);
    EXPECT_EQ(r1->fields, (std::vector<std::string>{"x, y", "line1\nline2"}));
    auto r2 = r.next();
    ASSERT_TRUE(r2);
    EXPECT_EQ(r2->fields[0], "q\"uote");
    EXPECT_EQ(r2->line, 4u);
    EXPECT_FALSE(r.next());
}

TEST(Csv, UnterminatedQuoteIsParseError) {
    std::istringstream in("a\n\"open\n");
    csv::Reader r(in, ',', "t");
    r.next();
    EXPECT_THROW(r.next(), ParseError);
}

TEST(Csv, WriteReadRoundTrip) {
    const std::vector<std::vector<std::string>> rows = {{"plain", "with,comma", "with \"quote\"", "multi\nline", ""}};
    std::ostringstream out;
    for (const auto& r : rows)
        csv::write_row(out, r);
    std::istringstream in(out.str());
    csv::Reader rd(in, ',', "t");
    auto back = rd.next();
    ASSERT_TRUE(back);
    EXPECT_EQ(back->fields, rows[0]);
}

TEST(Csv, TableStripsBomAndFindsColumns) {
    std::istringstream in("\xEF\xBB\xBFname,value\n\nx,1\n");
    const auto t = csv::read_table(in, ',', "t");
    EXPECT_EQ(t.column("name"), 0u);
    EXPECT_EQ(t.column("missing"), csv::Table::npos);
    EXPECT_EQ(t.rows.size(), 1u);
}

TEST(Io, DateParsing) {
    Date d;
    EXPECT_TRUE(parse_date("1998-03-04", d));
    EXPECT_EQ(format_date(d), "1998-03-04");
    EXPECT_FALSE(parse_date("1998-02-30", d));
    EXPECT_FALSE(parse_date("04/03/1998", d));
    EXPECT_THROW(parse_date_or_throw("x", "ctx"), InputError);
}

TEST(Io, MissingFileIsInputError) {
    EXPECT_THROW(open_input("/nonexistent/file.csv"), InputError);
}

TEST(Io, HashIsStable) {
    EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}
