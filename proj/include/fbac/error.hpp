#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbac {

enum class ErrorCode {
    UnknownSubject,
    UnknownFunction,
    UnknownObject,
    UnknownIdentifier,
    DuplicateIdentifier,
    ArityMismatch,
    InvalidIdentifier,
    PredicateError,
    InvalidPattern,
    PolicySyntax,
    MeaninglessPair,
    EnumerationTooLarge,
    ForeignClass,
    UnassignedPair,
    UnassignedSubject,
    UnassignedObject,
    MalformedDocument,
    DuplicateAtomId,
    DanglingLink,
    UnknownFunctionName,
    UnsupportedVersion,
    InvalidDocument,
    MissingClassification,
    UnknownAtom,
    DuplicateComposite,
    NotComposable,
    InvalidRange,
    InvalidAddress,
    InvalidOption,
    AccessDenied,
    InconsistentDefaults,
    NotASubset,
    Unauthenticated,
    UnknownDocument,
    Forbidden,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the engine; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace fbac
