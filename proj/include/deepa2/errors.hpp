#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepa2 {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Syntax error in one of the plain-text formats. `position` is a byte offset
// into the text that was being parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class MissingDimensionError : public Error {
public:
    using Error::Error;
};

// Formula outside the closed monadic fragment the decision procedure handles.
class UnsupportedFragmentError : public Error {
public:
    using Error::Error;
};

class BackendUnavailableError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class ImportError : public Error {
public:
    using Error::Error;
};

class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace deepa2
