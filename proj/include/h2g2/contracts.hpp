#pragma once

#include <stdexcept>
#include <string>

namespace h2g2 {

// Thrown when a caller violates a documented precondition.
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ContractError(message);
    }
}

}  // namespace h2g2
