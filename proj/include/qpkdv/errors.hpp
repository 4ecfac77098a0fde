#pragma once

#include <stdexcept>
#include <string>

namespace qpkdv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SmallDivisorError : public Error {
public:
    using Error::Error;
};

class DiffeoError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class ContractionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Invalid experiment configuration; `path` names the offending field, e.g. "kam.tau".
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& what) : Error(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Rethrows the in-flight qpkdv error with `prefix: ` prepended, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& prefix);

}  // namespace qpkdv
