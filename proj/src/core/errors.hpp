#pragma once

#include <stdexcept>
#include <string>

namespace pacta {

// Stable error identifiers shared by the C++ core and the C API.
enum class ErrorCode {
    InvalidArgument,
    Parse,
    Validation,
    NoSuchRight,
    DuplicateObligation,
    ConflictingDeonticState,
    UnknownContract,
    DuplicateContract,
    IncompleteBindings,
    UnknownInstance,
    TerminatedInstance,
    AlreadyTerminated,
    ClockRegression,
    UnknownSubject,
    AlreadyErased,
    SubjectKeyDestroyed,
    AuthenticationFailure,
    OutOfRange,
    StorageFailure,
    GasLimitExceedsBlockLimit,
    NonceInPast,
    UnknownTx,
    Internal,
};

const char* error_code_name(ErrorCode code);

class DomainError : public std::runtime_error {
public:
    DomainError(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message) {
    throw DomainError(code, std::move(message));
}

}  // namespace pacta
