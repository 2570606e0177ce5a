#include "mylibrary/error.hpp"

namespace mylib {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument:
        return "invalid-argument";
    case Errc::not_found:
        return "not-found";
    case Errc::conflict:
        return "conflict";
    case Errc::forbidden:
        return "forbidden";
    case Errc::authentication_failed:
        return "authentication-failed";
    case Errc::parse_error:
        return "parse-error";
    case Errc::refused:
        return "refused";
    case Errc::busy:
        return "busy";
    case Errc::io_error:
        return "io-error";
    }
    return "unknown";
}

Error::Error(Errc code, const std::string &message) : std::runtime_error(message), code_(code) {}

ParseError::ParseError(std::size_t offset, const std::string &reason)
    : Error(Errc::parse_error, reason + " at offset " + std::to_string(offset)), offset_(offset), reason_(reason) {}

namespace {

std::string JoinViolations(const std::vector<std::string> &violations) {
    std::string out = "validation failed";
    for (std::size_t i = 0; i < violations.size(); ++i) {
        out += i == 0 ? ": " : "; ";
        out += violations[i];
    }
    return out;
}

std::string DescribeReferences(const std::string &what, const std::map<std::string, std::size_t> &counts) {
    std::string out = what + " is still referenced";
    for (const auto &[kind, n] : counts)
        out += " (" + kind + ": " + std::to_string(n) + ")";
    return out;
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(Errc::invalid_argument, JoinViolations(violations)), violations_(std::move(violations)) {}

ReferencedError::ReferencedError(const std::string &what, std::map<std::string, std::size_t> counts)
    : Error(Errc::refused, DescribeReferences(what, counts)), counts_(std::move(counts)) {}

} // namespace mylib
