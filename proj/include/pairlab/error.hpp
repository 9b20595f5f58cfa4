#ifndef PAIRLAB_ERROR_HPP_
#define PAIRLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pairlab {

// Error classes map to CLI exit codes: usage -> 1, data -> 2, numeric -> 3.
enum class ErrorClass { Usage, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& message)
      : std::runtime_error(message), cls_(cls) {}

  ErrorClass error_class() const { return cls_; }

  int exit_code() const {
    switch (cls_) {
      case ErrorClass::Usage:
        return 1;
      case ErrorClass::Data:
        return 2;
      case ErrorClass::Numeric:
        return 3;
    }
    return 2;
  }

  const char* class_name() const {
    switch (cls_) {
      case ErrorClass::Usage:
        return "usage";
      case ErrorClass::Data:
        return "data";
      case ErrorClass::Numeric:
        return "numeric";
    }
    return "data";
  }

 private:
  ErrorClass cls_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorClass::Usage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorClass::Data, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorClass::Numeric, message) {}
};

}  // namespace pairlab

#endif  // PAIRLAB_ERROR_HPP_
