#pragma once

#include <stdexcept>
#include <string>

namespace seagrass {

// Raised when a caller breaks an operation's preconditions (shape, range, config).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

[[noreturn]] inline void contract_fail(const std::string& what) { throw ContractViolation(what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) contract_fail(what);
}

}  // namespace seagrass
