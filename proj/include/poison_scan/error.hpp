#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poison_scan {

enum class ErrorCode : std::uint8_t {
    BadMagic,
    TruncatedFile,
    TrailingData,
    NonFiniteValue,
    ZeroDim,
    EmptyMatrix,
    InvalidLabelValue,
    ZeroRow,
    IoError,
    DimMismatch,
    CountMismatch,
    KTooLarge,
    KTooSmall,
    TooFewPoints,
    DatasetTooSmall,
    DegenerateLabels,
    EmptyScores,
    IndexOutOfRange,
    InvalidConfig,
    InvalidPolicy,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised for a non-finite embedding value; keeps the offending coordinates.
class NonFiniteValueError : public Error {
public:
    NonFiniteValueError(std::size_t row, std::size_t col)
        : Error(ErrorCode::NonFiniteValue,
                "row " + std::to_string(row) + ", col " + std::to_string(col)),
          row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

/// Raised by l2_normalize for an all-zero row.
class ZeroRowError : public Error {
public:
    explicit ZeroRowError(std::size_t index)
        : Error(ErrorCode::ZeroRow, "row " + std::to_string(index)), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace poison_scan
