#pragma once

// Minimal RFC 4180 style delimited-text reader/writer. Fields may be quoted
// with '"', quotes inside quoted fields are doubled, and quoted fields may
// span lines. Both LF and CRLF line endings are accepted.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "parlshift/error.hpp"

namespace parlshift::csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based line on which the row starts
};

class Reader {
public:
    Reader(std::istream& in, char delimiter = ',', std::string source = "<input>")
        : in_(in), delim_(delimiter), source_(std::move(source)) {}

    // Next row, or nullopt at end of input. Throws ParseError on an
    // unterminated quoted field.
    std::optional<Row> next() {
        Row row;
        row.line = line_ + 1;
        std::string field;
        bool any = false;
        bool quoted = false;
        bool after_quote = false;
        int ch;
        while ((ch = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            const char c = static_cast<char>(ch);
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                        after_quote = true;
                    }
                } else {
                    if (c == '\n')
                        ++line_;
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"' && field.empty() && !after_quote) {
                quoted = true;
            } else if (c == delim_) {
                row.fields.push_back(std::move(field));
                field.clear();
                after_quote = false;
            } else if (c == '\n') {
                ++line_;
                if (!field.empty() && field.back() == '\r' && !after_quote)
                    field.pop_back();
                row.fields.push_back(std::move(field));
                return row;
            } else if (c == '\r' && after_quote) {
                // CR of a CRLF after a closing quote
            } else {
                field.push_back(c);
            }
        }
        if (quoted)
            throw ParseError(source_, row.line, "unterminated quoted field");
        if (!any)
            return std::nullopt;
        ++line_;
        if (!field.empty() && field.back() == '\r' && !after_quote)
            field.pop_back();
        row.fields.push_back(std::move(field));
        return row;
    }

    const std::string& source() const noexcept { return source_; }

private:
    std::istream& in_;
    char delim_;
    std::string source_;
    std::size_t line_ = 0;
};

inline bool needs_quotes(std::string_view field, char delimiter) {
    for (char c : field)
        if (c == delimiter || c == '"' || c == '\n' || c == '\r')
            return true;
    return false;
}

inline void write_field(std::ostream& out, std::string_view field, char delimiter) {
    if (!needs_quotes(field, delimiter)) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"')
            out << '"';
        out << c;
    }
    out << '"';
}

template <typename Range>
void write_row(std::ostream& out, const Range& fields, char delimiter = ',') {
    bool first = true;
    for (const auto& f : fields) {
        if (!first)
            out << delimiter;
        first = false;
        write_field(out, f, delimiter);
    }
    out << '\n';
}

inline void write_row(std::ostream& out, std::initializer_list<std::string_view> fields, char delimiter = ',') {
    write_row<std::initializer_list<std::string_view>>(out, fields, delimiter);
}

// Reads a whole table whose first row is a header. Column names are matched
// case-sensitively; missing required columns raise ParseError on line 1.
struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        return npos;
    }
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

inline Table read_table(std::istream& in, char delimiter, const std::string& source) {
    Reader reader(in, delimiter, source);
    Table t;
    auto head = reader.next();
    if (!head)
        return t;
    t.header = std::move(head->fields);
    if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0)
        t.header[0].erase(0, 3);
    while (auto row = reader.next()) {
        if (row->fields.size() == 1 && row->fields[0].empty())
            continue;
        t.rows.push_back(std::move(*row));
    }
    return t;
}

} // namespace parlshift::csv
