#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mylib {

enum class Errc {
    invalid_argument,
    not_found,
    conflict,
    forbidden,
    authentication_failed,
    parse_error,
    refused,
    busy,
    io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Base of every error the library throws. The code is what callers branch on;
/// the message is for humans and logs.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string &message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Unparseable input. `offset` is the byte position in the original text where
/// parsing gave up.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string &reason);

    std::size_t offset() const noexcept { return offset_; }
    const std::string &reason() const noexcept { return reason_; }

private:
    std::size_t offset_;
    std::string reason_;
};

/// A payload broke one or more model invariants; every violation is listed.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations);

    const std::vector<std::string> &violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// A delete was refused because other records still point at the target.
class ReferencedError : public Error {
public:
    ReferencedError(const std::string &what, std::map<std::string, std::size_t> counts);

    const std::map<std::string, std::size_t> &counts() const noexcept { return counts_; }

private:
    std::map<std::string, std::size_t> counts_;
};

} // namespace mylib
