#pragma once

#include <stdexcept>
#include <string>

namespace parlshift {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: missing files, malformed tables, invalid options.
// The CLI maps this to exit status 1; everything else maps to 2.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& where, std::size_t line, const std::string& what)
        : InputError(where + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Word lookups distinguish a word the model never saw from one that a
// frequency filter removed.
class OutOfVocabulary : public Error {
public:
    explicit OutOfVocabulary(const std::string& word)
        : Error("word not in vocabulary: " + word), word_(word) {}
    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

class FilteredOut : public Error {
public:
    explicit FilteredOut(const std::string& word)
        : Error("word removed by frequency cut-offs: " + word), word_(word) {}
    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace parlshift
