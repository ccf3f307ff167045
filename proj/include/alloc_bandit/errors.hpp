#pragma once

#include <stdexcept>
#include <string>

namespace alloc_bandit {

// Raised when a caller breaks an operation's precondition (negative
// allocation, budget overrun, out-of-range delta, ...).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ContractViolation(message);
    }
}

}  // namespace alloc_bandit
