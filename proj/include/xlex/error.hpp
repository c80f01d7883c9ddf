#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xlex {

// Base of every error raised by the library. The CLI maps subclasses to exit
// codes, so each distinguishable failure class gets its own type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed UTF-8. offset is the byte position inside the offending line.
class DecodeError : public Error {
public:
    DecodeError(std::size_t offset, const std::string& what)
        : Error(what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Malformed file contents. line is 1-based; 0 when not applicable.
class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DuplicateEntryError : public FormatError {
public:
    using FormatError::FormatError;
};

class EmptyVocabularyError : public Error {
public:
    using Error::Error;
};

class UnknownWordError : public Error {
public:
    explicit UnknownWordError(const std::string& word)
        : Error("unknown word: " + word), word_(word) {}
    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

class DegenerateVectorError : public Error {
public:
    explicit DegenerateVectorError(const std::string& word)
        : Error("degenerate (zero-norm) vector for word: " + word), word_(word) {}
    const std::string& word() const noexcept { return word_; }

private:
    std::string word_;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(std::size_t a, std::size_t b)
        : Error("dimension mismatch " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class UndefinedCorrelationError : public Error {
public:
    using Error::Error;
};

class RepresentationUnavailableError : public Error {
public:
    using Error::Error;
};

}  // namespace xlex
