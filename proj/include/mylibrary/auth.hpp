#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mylibrary/time.hpp"

namespace mylib {

/// Turns an external login assertion into a verified auth_id.
class Authenticator {
public:
    virtual ~Authenticator() = default;

    /// Where to send a browser that has no session. `return_to` is appended
    /// as a query parameter.
    virtual std::string login_url(std::string_view return_to) const = 0;
    /// Returns the auth_id or throws Error(authentication_failed).
    virtual std::string verify(std::string_view assertion) const = 0;
};

/// Accepts the assertion itself as the identity. For tests and demos only.
/// The identity must be 1-128 characters from [A-Za-z0-9._@-].
std::unique_ptr<Authenticator> make_stub_authenticator(std::string login_url);

/// Accepts "auth_id|expiry|signature" where expiry is Unix seconds and
/// signature is hex HMAC-SHA256 of "auth_id|expiry" under a shared secret.
std::unique_ptr<Authenticator> make_signed_authenticator(std::string login_url, std::string secret, Clock clock);

std::string sign_assertion(std::string_view secret, std::string_view auth_id, Timestamp expiry);

bool is_valid_auth_id(std::string_view auth_id) noexcept;

/// RFC 3986 percent-encoding; unreserved characters pass through, the rest
/// become upper-case %XX.
std::string percent_encode(std::string_view text);
/// Strict inverse of percent_encode plus acceptance of lower-case hex.
/// Throws ParseError on a truncated or non-hex escape.
std::string percent_decode(std::string_view text);

} // namespace mylib
