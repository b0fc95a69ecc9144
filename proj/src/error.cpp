#include "poison_scan/error.hpp"

namespace poison_scan {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ZeroDim: return "ZeroDim";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::InvalidLabelValue: return "InvalidLabelValue";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::KTooSmall: return "KTooSmall";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    }
    return "Unknown";
}

}  // namespace poison_scan
