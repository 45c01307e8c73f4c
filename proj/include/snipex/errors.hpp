#pragma once

#include <stdexcept>
#include <string>

namespace snipex {

// Source text that does not lex or parse. Carries the 1-based location of the
// first offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line, int col)
        : std::runtime_error(std::move(message)), line_(line), col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

// Lookup of an instrument id that was never issued for the program.
class UnknownIid : public std::runtime_error {
public:
    explicit UnknownIid(int iid)
        : std::runtime_error("unknown instrument id " + std::to_string(iid)), iid_(iid) {}

    int iid() const { return iid_; }

private:
    int iid_;
};

// Thrown by the interactive value predictor after t failed iterations.
class InvalidValueError : public std::runtime_error {
public:
    explicit InvalidValueError(std::string message) : std::runtime_error(std::move(message)) {}
};

// Completion backend could not produce a reply (network failure, timeout).
class BackendUnavailable : public std::runtime_error {
public:
    explicit BackendUnavailable(std::string message) : std::runtime_error(std::move(message)) {}
};

// Replay transcript has no entry left that matches the request.
class TranscriptExhausted : public std::runtime_error {
public:
    explicit TranscriptExhausted(std::string message) : std::runtime_error(std::move(message)) {}
};

// Model reply contained no usable code.
class EmptyReply : public std::runtime_error {
public:
    explicit EmptyReply(std::string message) : std::runtime_error(std::move(message)) {}
};

}  // namespace snipex
