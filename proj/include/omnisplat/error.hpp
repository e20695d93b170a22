#pragma once

#include <stdexcept>
#include <string>

namespace omnisplat {

enum class ErrorCode {
    ZeroRadius,
    PoleDegenerate,
    OutOfBounds,
    BehindCamera,
    EmptyPointCloud,
    StateMismatch,
    DimensionMismatch,
    ParseError,
    ValidationError,
    UnsupportedFormat,
    MissingProperty,
    VersionMismatch,
    DecodeError,
    EmptySplit,
    IoError,
    InvalidArgument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ZeroRadius: return "ZeroRadius";
        case ErrorCode::PoleDegenerate: return "PoleDegenerate";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::BehindCamera: return "BehindCamera";
        case ErrorCode::EmptyPointCloud: return "EmptyPointCloud";
        case ErrorCode::StateMismatch: return "StateMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::MissingProperty: return "MissingProperty";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::EmptySplit: return "EmptySplit";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace omnisplat
