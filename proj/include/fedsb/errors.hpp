#pragma once

#include <stdexcept>
#include <string>

namespace fedsb {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad hyperparameter, degenerate task spec, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// Dimension or length mismatch between values that must agree.
struct ShapeError : Error {
    using Error::Error;
};

/// Argument outside its valid domain (label out of range, M < 2, ...).
struct ValueError : Error {
    using Error::Error;
};

/// Config-file or data-file parse failure; message names the offending key.
struct ParseError : Error {
    using Error::Error;
};

/// Filesystem failure; message carries the path.
struct IoError : Error {
    using Error::Error;
};

} // namespace fedsb
