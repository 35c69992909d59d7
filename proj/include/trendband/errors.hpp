#pragma once

#include <stdexcept>
#include <string>

namespace trendband {

// Malformed or inconsistent input data (CSV parsing, bad file contents).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation could not be completed meaningfully: degenerate fits,
// no selectable bandwidth, no constructible band, factorization failure.
// Distinct from std::invalid_argument, which flags caller errors.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trendband
