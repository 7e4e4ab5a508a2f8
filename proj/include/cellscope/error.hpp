#ifndef CELLSCOPE_ERROR_HPP
#define CELLSCOPE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

/**
 * @file error.hpp
 *
 * @brief Exception type shared by every cellscope module.
 */

namespace cellscope {

/**
 * Failure categories. Each module raises a subset of these; the service layer
 * maps them onto HTTP error codes.
 */
enum class ErrorKind {
    FileNotReadable,
    NotAnnData,
    UnsupportedEncoding,
    DimensionMismatch,
    InvalidData,
    IndexOutOfRange,
    IoFailure,
    OutOfMemoryBudget,
    CorruptSection,
    UnknownDataset,
    IllegalState,
    NetworkUnavailable,
    MalformedResponse,
    ChecksumMismatch,
    NoAssetAvailable,
    GroupTooSmall,
    SelectionTooSmall,
    InvalidDf,
    NumericError,
    EmptyPointSet,
    NonFiniteCoordinate,
    NonPositiveRadius,
    DegeneratePolygon,
    NegativeExpression,
    PortInUse,
    DataDirUnwritable,
    BadRequest,
    NotFound,
    Conflict
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FileNotReadable: return "FileNotReadable";
        case ErrorKind::NotAnnData: return "NotAnnData";
        case ErrorKind::UnsupportedEncoding: return "UnsupportedEncoding";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidData: return "InvalidData";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::OutOfMemoryBudget: return "OutOfMemoryBudget";
        case ErrorKind::CorruptSection: return "CorruptSection";
        case ErrorKind::UnknownDataset: return "UnknownDataset";
        case ErrorKind::IllegalState: return "IllegalState";
        case ErrorKind::NetworkUnavailable: return "NetworkUnavailable";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorKind::NoAssetAvailable: return "NoAssetAvailable";
        case ErrorKind::GroupTooSmall: return "GroupTooSmall";
        case ErrorKind::SelectionTooSmall: return "SelectionTooSmall";
        case ErrorKind::InvalidDf: return "InvalidDf";
        case ErrorKind::NumericError: return "NumericError";
        case ErrorKind::EmptyPointSet: return "EmptyPointSet";
        case ErrorKind::NonFiniteCoordinate: return "NonFiniteCoordinate";
        case ErrorKind::NonPositiveRadius: return "NonPositiveRadius";
        case ErrorKind::DegeneratePolygon: return "DegeneratePolygon";
        case ErrorKind::NegativeExpression: return "NegativeExpression";
        case ErrorKind::PortInUse: return "PortInUse";
        case ErrorKind::DataDirUnwritable: return "DataDirUnwritable";
        case ErrorKind::BadRequest: return "BadRequest";
        case ErrorKind::NotFound: return "NotFound";
        case ErrorKind::Conflict: return "Conflict";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}

#endif
