#pragma once

#include <stdexcept>
#include <string>

namespace relosim {

// Error categories surfaced by the CLI as "error[<category>]: <message>".
enum class ErrorCategory { Domain, Data, Contract, Numeric, Config, Io };

inline const char* to_string(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Contract: return "contract";
    case ErrorCategory::Numeric: return "numeric";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error(ErrorCategory::Domain, m) {}
};
struct DataError : Error {
    explicit DataError(const std::string& m) : Error(ErrorCategory::Data, m) {}
};
struct ContractError : Error {
    explicit ContractError(const std::string& m) : Error(ErrorCategory::Contract, m) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error(ErrorCategory::Numeric, m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorCategory::Config, m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error(ErrorCategory::Io, m) {}
};

} // namespace relosim
