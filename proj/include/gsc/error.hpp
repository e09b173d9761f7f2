#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gsc {

/// Base class for every error raised by the codec.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or missing input data: parse failures, invariant violations, corrupt
/// containers. Maps to CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::uint64_t byte_offset)
        : DataError(what + " (at byte " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}
    std::uint64_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::uint64_t byte_offset_;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class UnsupportedVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class CorruptionError : public DataError {
public:
    using DataError::DataError;
};

class DecodeError : public CorruptionError {
public:
    DecodeError(const std::string& what, std::uint64_t bit_offset)
        : CorruptionError(what + " (at bit " + std::to_string(bit_offset) + ")"),
          bit_offset_(bit_offset) {}
    std::uint64_t bit_offset() const noexcept { return bit_offset_; }

private:
    std::uint64_t bit_offset_;
};

/// A Gaussian projects to z <= 0 in its own view.
class BehindCameraError : public DataError {
public:
    BehindCameraError(std::size_t view, int row, int col, double z)
        : DataError("gaussian behind camera in view " + std::to_string(view) + " at pixel (" +
                    std::to_string(row) + ", " + std::to_string(col) +
                    "), z = " + std::to_string(z)),
          view_(view), row_(row), col_(col) {}
    std::size_t view() const noexcept { return view_; }
    int row() const noexcept { return row_; }
    int col() const noexcept { return col_; }

private:
    std::size_t view_;
    int row_;
    int col_;
};

/// External codec problems. Maps to CLI exit code 3.
class BackendError : public Error {
public:
    using Error::Error;
};

class BackendUnavailableError : public BackendError {
public:
    using BackendError::BackendError;
};

class ProcessError : public BackendError {
public:
    ProcessError(const std::string& what, int exit_status, std::string diagnostics)
        : BackendError(what + " (exit status " + std::to_string(exit_status) + ")" +
                       (diagnostics.empty() ? std::string{} : ": " + diagnostics)),
          exit_status_(exit_status), diagnostics_(std::move(diagnostics)) {}
    int exit_status() const noexcept { return exit_status_; }
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    int exit_status_;
    std::string diagnostics_;
};

}  // namespace gsc
