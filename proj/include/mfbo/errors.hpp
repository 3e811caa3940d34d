#pragma once

#include <stdexcept>
#include <string>

namespace mfbo {

    /// Base class of all library exceptions.
    struct Error : std::runtime_error {
        using std::runtime_error::runtime_error;
    };

    /// Numerical failures (exit code 3 in the CLI).
    struct NumericError : Error {
        using Error::Error;
    };
    struct NotSquareError : NumericError {
        using NumericError::NumericError;
    };
    struct NotPositiveDefiniteError : NumericError {
        using NumericError::NumericError;
    };
    struct NonFiniteError : NumericError {
        using NumericError::NumericError;
    };
    struct ChainDivergedError : NumericError {
        using NumericError::NumericError;
    };

    /// Bad arguments or malformed inputs (exit code 2 in the CLI).
    struct InvalidParameterError : Error {
        using Error::Error;
    };
    struct FidelityOutOfRangeError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };
    struct DegenerateBoundsError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };
    struct TooFewSamplesError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };
    struct EmptySampleSetError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };
    struct LengthMismatchError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };
    struct EmptyError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };
    struct ConfigError : InvalidParameterError {
        using InvalidParameterError::InvalidParameterError;
    };

    /// State-file problems (exit code 2 in the CLI).
    struct IoFailureError : Error {
        using Error::Error;
    };
    struct SchemaVersionMismatchError : IoFailureError {
        using IoFailureError::IoFailureError;
    };
    struct ChecksumMismatchError : IoFailureError {
        using IoFailureError::IoFailureError;
    };

    /// Ask/tell protocol violations (exit code 4 in the CLI).
    struct ProtocolError : Error {
        using Error::Error;
    };
    struct PendingBatchExistsError : ProtocolError {
        using ProtocolError::ProtocolError;
    };
    struct NoPendingBatchError : ProtocolError {
        using ProtocolError::ProtocolError;
    };
    struct MismatchedResultsError : ProtocolError {
        using ProtocolError::ProtocolError;
    };

} // namespace mfbo
