#pragma once

#include <stdexcept>
#include <string>

namespace sepmix {

enum class ErrorKind {
    InvalidLaw,
    NotTransient,
    NotTrapped,
    RootNotBracketed,
    BadK,
    ShapeMismatch,
    EmptyRange,
    TooLarge,
    WindowTooWide,
    WindowTooLarge,
    CapExceeded,
    SchemaError,
    InvalidArgument,
    PropertyViolation,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidLaw: return "InvalidLaw";
        case ErrorKind::NotTransient: return "NotTransient";
        case ErrorKind::NotTrapped: return "NotTrapped";
        case ErrorKind::RootNotBracketed: return "RootNotBracketed";
        case ErrorKind::BadK: return "BadK";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::EmptyRange: return "EmptyRange";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::WindowTooWide: return "WindowTooWide";
        case ErrorKind::WindowTooLarge: return "WindowTooLarge";
        case ErrorKind::CapExceeded: return "CapExceeded";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::PropertyViolation: return "PropertyViolation";
    }
    return "Error";
}

}  // namespace sepmix
