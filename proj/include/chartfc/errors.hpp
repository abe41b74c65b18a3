#pragma once
// Error types raised across the toolkit. Every failure the pipeline can
// report maps to one of these; the CLI translates them into exit codes
// (2 for input errors, 1 for runtime errors).

#include <stdexcept>
#include <string>

namespace chartfc {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input-side errors (CLI exit code 2)
struct InputError : Error {
    using Error::Error;
};

// Runtime-side errors (CLI exit code 1)
struct RuntimeError : Error {
    using Error::Error;
};

// core-model
struct MalformedSeed : InputError {
    using InputError::InputError;
};
struct IoFailure : RuntimeError {
    using RuntimeError::RuntimeError;
};
struct SchemaVersionMismatch : InputError {
    using InputError::InputError;
};

// claim-linker: sub-table rejections carry a reason code that the
// generate command writes to its rejection log.
enum class RejectReason {
    TooManyColumns,
    TooManyRows,
    NonNumeric,
    Underlinked,
};

const char* to_string(RejectReason r);

struct Rejected : InputError {
    RejectReason reason;
    Rejected(RejectReason r, const std::string& msg) : InputError(msg), reason(r) {}
};
struct RejectedTooManyColumns : Rejected {
    explicit RejectedTooManyColumns(const std::string& msg)
        : Rejected(RejectReason::TooManyColumns, msg) {}
};
struct RejectedTooManyRows : Rejected {
    explicit RejectedTooManyRows(const std::string& msg)
        : Rejected(RejectReason::TooManyRows, msg) {}
};
struct RejectedNonNumeric : Rejected {
    explicit RejectedNonNumeric(const std::string& msg)
        : Rejected(RejectReason::NonNumeric, msg) {}
};
struct RejectedUnderlinked : Rejected {
    explicit RejectedUnderlinked(const std::string& msg)
        : Rejected(RejectReason::Underlinked, msg) {}
};

// chart-renderer
struct LayoutOverflow : InputError {
    using InputError::InputError;
};

// chart-reader
struct MissingSidecar : InputError {
    using InputError::InputError;
};
struct AdapterUnreachable : RuntimeError {
    using RuntimeError::RuntimeError;
};
struct MalformedAdapterReply : RuntimeError {
    using RuntimeError::RuntimeError;
};
struct Unclassifiable : InputError {
    using InputError::InputError;
};

// seqgen
struct EmptyReadOutput : InputError {
    using InputError::InputError;
};
struct UnpairedRegions : InputError {
    using InputError::InputError;
};
struct MissingAxisTitle : InputError {
    using InputError::InputError;
};

// structural-encoder
struct ClaimTooLong : InputError {
    using InputError::InputError;
};

// neural-core
struct ShapeMismatch : RuntimeError {
    using RuntimeError::RuntimeError;
};
struct BadMagic : InputError {
    using InputError::InputError;
};

// fusion
struct DecodeFailure : InputError {
    using InputError::InputError;
};

// train-eval
struct SingleClassDataset : InputError {
    using InputError::InputError;
};
struct EmptySplit : InputError {
    using InputError::InputError;
};
struct UnknownSampleId : InputError {
    using InputError::InputError;
};

// cli
struct ConfigError : InputError {
    using InputError::InputError;
};

}  // namespace chartfc
