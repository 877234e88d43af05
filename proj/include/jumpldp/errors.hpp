#pragma once

#include <stdexcept>
#include <string>

namespace jumpldp {

// Bad input: malformed documents, inconsistent dimensions, violated preconditions.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, caps exceeded, domain errors.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public NumericError {
public:
    using NumericError::NumericError;
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, int line, int column)
        : ValidationError(msg + " (line " + std::to_string(line) + ", column " +
                          std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace jumpldp
