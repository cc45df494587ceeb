#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace taskrec {

// Bad parameters, malformed data, or shape mismatches. The CLI maps these
// to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed content in a data file; `line` is 1-based.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& message, std::size_t line)
        : ValidationError("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Filesystem failures (open/read/write). The CLI maps these to exit code 1.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace taskrec
