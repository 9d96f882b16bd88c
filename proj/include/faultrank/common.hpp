#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace faultrank {

using Timestamp = std::int64_t;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or unreadable user input. The CLI maps this to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Cross-artifact inconsistency, e.g. a label referencing an unknown commit.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Records parsed from a file plus the per-row problems that were skipped.
template <typename T>
struct Parsed {
  std::vector<T> items;
  std::vector<std::string> warnings;
};

/// Accepts epoch seconds ("1449878400") or ISO-8601 ("2015-12-12",
/// "2015-12-12T00:00:00Z", "2015-12-12 08:00:00+02:00"). Returns nullopt
/// when the text is neither.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::string trim(std::string_view text);

}  // namespace faultrank
