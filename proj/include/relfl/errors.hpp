#pragma once

#include <stdexcept>
#include <string>

namespace relfl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The tracked precision of an operand is too low to decide the requested
/// quantity (a leading coefficient, a valuation comparison, an integrality test).
class InsufficientPrecision : public Error {
 public:
  using Error::Error;
};

class DivisionByZero : public Error {
 public:
  using Error::Error;
};

class NotInBaseField : public Error {
 public:
  using Error::Error;
};

class ZeroInput : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class SquareRootFailure : public Error {
 public:
  using Error::Error;
};

class MalformedShape : public Error {
 public:
  using Error::Error;
};

class WindowTooLarge : public Error {
 public:
  using Error::Error;
};

class UncertifiedWindow : public Error {
 public:
  using Error::Error;
};

class InconsistentCase : public Error {
 public:
  using Error::Error;
};

class DegenerateDiscriminant : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace relfl
