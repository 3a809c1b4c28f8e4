#include "core/errors.hpp"

namespace pacta {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Validation: return "Validation";
        case ErrorCode::NoSuchRight: return "NoSuchRight";
        case ErrorCode::DuplicateObligation: return "DuplicateObligation";
        case ErrorCode::ConflictingDeonticState: return "ConflictingDeonticState";
        case ErrorCode::UnknownContract: return "UnknownContract";
        case ErrorCode::DuplicateContract: return "DuplicateContract";
        case ErrorCode::IncompleteBindings: return "IncompleteBindings";
        case ErrorCode::UnknownInstance: return "UnknownInstance";
        case ErrorCode::TerminatedInstance: return "TerminatedInstance";
        case ErrorCode::AlreadyTerminated: return "AlreadyTerminated";
        case ErrorCode::ClockRegression: return "ClockRegression";
        case ErrorCode::UnknownSubject: return "UnknownSubject";
        case ErrorCode::AlreadyErased: return "AlreadyErased";
        case ErrorCode::SubjectKeyDestroyed: return "SubjectKeyDestroyed";
        case ErrorCode::AuthenticationFailure: return "AuthenticationFailure";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::StorageFailure: return "StorageFailure";
        case ErrorCode::GasLimitExceedsBlockLimit: return "GasLimitExceedsBlockLimit";
        case ErrorCode::NonceInPast: return "NonceInPast";
        case ErrorCode::UnknownTx: return "UnknownTx";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace pacta
