#pragma once

#include <stdexcept>
#include <string>

namespace gaitmp {

/// Caller violated a precondition (bad length, bad parameter, out-of-order input).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input data is malformed or cannot be processed (NaN, bad CSV row, empty profile).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gaitmp
