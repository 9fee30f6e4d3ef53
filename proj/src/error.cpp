#include "homectx/error.hpp"

namespace homectx {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownProvider: return "UnknownProvider";
        case ErrorCode::DuplicateProvider: return "DuplicateProvider";
        case ErrorCode::NonMonotoneStamp: return "NonMonotoneStamp";
        case ErrorCode::InvalidPattern: return "InvalidPattern";
        case ErrorCode::InvalidValue: return "InvalidValue";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyLibrary: return "EmptyLibrary";
        case ErrorCode::DanglingParent: return "DanglingParent";
        case ErrorCode::DuplicateTaskId: return "DuplicateTaskId";
        case ErrorCode::UnknownTask: return "UnknownTask";
        case ErrorCode::MissingContract: return "MissingContract";
        case ErrorCode::InvalidTaskId: return "InvalidTaskId";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::AttributeSetMismatch: return "AttributeSetMismatch";
        case ErrorCode::NoCommonAttributes: return "NoCommonAttributes";
        case ErrorCode::EmptySnapshot: return "EmptySnapshot";
        case ErrorCode::DuplicateExactCase: return "DuplicateExactCase";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnboundVariable: return "UnboundVariable";
        case ErrorCode::TypeError: return "TypeError";
        case ErrorCode::DuplicateSubscription: return "DuplicateSubscription";
        case ErrorCode::RequirementUnsatisfied: return "RequirementUnsatisfied";
        case ErrorCode::StepTimeout: return "StepTimeout";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::NoResponder: return "NoResponder";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::NoProvider: return "NoProvider";
        case ErrorCode::UnsupportedMethod: return "UnsupportedMethod";
        case ErrorCode::UnknownService: return "UnknownService";
        case ErrorCode::NotRunning: return "NotRunning";
        case ErrorCode::Io: return "Io";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

SourceError::SourceError(ErrorCode code, int line, int column, const std::string& message)
    : Error(code, "line " + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace homectx
