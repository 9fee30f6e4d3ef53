#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homectx {

enum class ErrorCode {
    // context store
    UnknownProvider,
    DuplicateProvider,
    NonMonotoneStamp,
    InvalidPattern,
    InvalidValue,
    // task model
    ParseError,
    EmptyLibrary,
    DanglingParent,
    DuplicateTaskId,
    UnknownTask,
    MissingContract,
    InvalidTaskId,
    // reasoner
    KindMismatch,
    AttributeSetMismatch,
    NoCommonAttributes,
    EmptySnapshot,
    DuplicateExactCase,
    InvalidConfig,
    // rules
    SyntaxError,
    UnboundVariable,
    TypeError,
    DuplicateSubscription,
    RequirementUnsatisfied,
    StepTimeout,
    // bus
    Timeout,
    NoResponder,
    // services
    DuplicateId,
    NoProvider,
    UnsupportedMethod,
    UnknownService,
    // scheduler
    NotRunning,
    // misc
    Io,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. `code()` is what
/// callers and tests branch on; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Error tied to a position in some source text (task files, rule files, CSV).
class SourceError : public Error {
public:
    SourceError(ErrorCode code, int line, int column, const std::string& message);

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace homectx
