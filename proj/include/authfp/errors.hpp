#pragma once

#include <stdexcept>
#include <string>

namespace authfp {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied argument violated a documented precondition.
class InvalidArgumentError : public Error {
public:
    explicit InvalidArgumentError(const std::string& what) : Error(what) {}
};

/// Tensor/network dimensions do not line up; message carries expected vs actual.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(what) {}
};

/// Training produced a non-finite loss or gradient.
class TrainingDivergedError : public Error {
public:
    explicit TrainingDivergedError(const std::string& what) : Error(what) {}
};

/// A corpus image file could not be read or decoded.
class IngestionError : public Error {
public:
    explicit IngestionError(const std::string& what) : Error(what) {}
};

/// Detector artifact I/O failed. Subclasses name the exact corruption.
class PersistenceError : public Error {
public:
    explicit PersistenceError(const std::string& what) : Error(what) {}
};

/// File does not start with the expected magic bytes.
class UnsupportedFormatError : public PersistenceError {
public:
    explicit UnsupportedFormatError(const std::string& what) : PersistenceError(what) {}
};

/// Format version is newer than this build understands.
class UnknownVersionError : public PersistenceError {
public:
    explicit UnknownVersionError(const std::string& what) : PersistenceError(what) {}
};

/// Trailing CRC-32 does not match the file contents.
class ChecksumError : public PersistenceError {
public:
    explicit ChecksumError(const std::string& what) : PersistenceError(what) {}
};

/// File ended before the declared payload was complete.
class TruncatedFileError : public PersistenceError {
public:
    explicit TruncatedFileError(const std::string& what) : PersistenceError(what) {}
};

/// Experiment configuration failed schema validation.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace authfp
