#ifndef SGCALC_ERRORS_HPP
#define SGCALC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sgcalc {

// Raised by the expression parser; carries the byte offset of the offending token.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, int offset)
    : std::runtime_error(msg), offset_(offset) {}
  int offset() const { return offset_; }
private:
  int offset_;
};

// Raised when an evaluation leaves a function's domain (sqrt of a negative,
// division by zero, fractional power of a non-positive base). The message
// cites the offending subtree.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised when a value fails a declared precondition or type invariant.
class InvalidInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace sgcalc

#endif
