#pragma once

#include <stdexcept>
#include <string>

namespace wgfd {

// Base class for every error raised by the library. `user_error()` separates
// bad input (CLI exit code 2) from internal failures (exit code 1).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, bool user_error = true)
        : std::runtime_error(what), user_error_(user_error) {}

    bool user_error() const noexcept { return user_error_; }

private:
    bool user_error_;
};

class UnknownWaveletError : public Error {
public:
    explicit UnknownWaveletError(const std::string& name)
        : Error("unknown wavelet '" + name + "' (supported: haar, db2)"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// Shape / length / range violations on inputs.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class CorruptFileError : public Error {
public:
    using Error::Error;
};

// A stored tensor table that disagrees with its architecture.
class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

class VersionMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace wgfd
