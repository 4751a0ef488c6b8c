#ifndef ICD_ERRORS_HPP
#define ICD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace icd {

/// Base of every error raised by the library. The message is a single line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file header, magic or CSV layout.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

/// Data that parses but violates a type invariant (duplicate ids, NaN, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io error: " + what) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error("training error: " + what) {}
};

class SeedingError : public Error {
 public:
  explicit SeedingError(const std::string& what) : Error("seeding error: " + what) {}
};

}  // namespace icd

#endif  // ICD_ERRORS_HPP
