#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace siamaug {

// Dense activity index. 0 and 1 are reserved for padding and the
// end-of-sequence class; real activities start at 2.
using ActivityId = std::int32_t;

inline constexpr ActivityId kPadId = 0;
inline constexpr ActivityId kEosId = 1;
inline constexpr std::size_t kReservedIds = 2;

// Bad configuration or unmet operation precondition. CLI maps this to exit 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse: calling an operation whose stated contract does not hold.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed input data (CSV/XES/JSON files).
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(with_position(msg, line, column)), line(line), column(column) {}

  std::size_t line;
  std::size_t column;

 private:
  static std::string with_position(const std::string& msg, std::size_t line, std::size_t column) {
    if (line == 0) return msg;
    std::string out = msg + " (line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    out += ")";
    return out;
  }
};

// Numerical failure during optimization (non-finite loss or gradient).
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace siamaug
