#pragma once

#include <stdexcept>
#include <string>

namespace dmapx {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   ContractError -> exit 2 (bad arguments / precondition violations)
//   NumericError  -> exit 3 (non-convergence, step-size blowup, disconnected graph)
//   CapacityError -> exit 3 (resource budget exceeded; advises remediation)
//   IoError       -> exit 4 (file system / parse failures)
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

}  // namespace dmapx
