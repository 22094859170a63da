#pragma once

#include <stdexcept>
#include <string>

namespace salix {

// Error categories map onto CLI exit codes: config=2, data=3, numeric=4.
enum class ErrorCategory { Config, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string message)
      : std::runtime_error(std::move(message)), category_(category) {}

  ErrorCategory category() const { return category_; }

  const char* category_name() const {
    switch (category_) {
      case ErrorCategory::Config: return "config";
      case ErrorCategory::Data: return "data";
      case ErrorCategory::Numeric: return "numeric";
    }
    return "unknown";
  }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::string message)
      : Error(ErrorCategory::Config, std::move(message)) {}
};

class DataError : public Error {
 public:
  explicit DataError(std::string message)
      : Error(ErrorCategory::Data, std::move(message)) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(std::string message)
      : Error(ErrorCategory::Numeric, std::move(message)) {}
};

}  // namespace salix
