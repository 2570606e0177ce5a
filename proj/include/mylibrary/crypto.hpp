#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace mylib::crypto {

/// `bytes` bytes from the OS CSPRNG, lower-case hex.
std::string random_hex(std::size_t bytes);

std::string hmac_sha256_hex(std::string_view key, std::string_view data);

/// Compares without an early exit; lengths are not secret.
bool constant_time_equal(std::string_view a, std::string_view b) noexcept;

/// "pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>"
std::string make_password_verifier(std::string_view password, unsigned iterations = 120000);
/// False for a wrong password and for a verifier that does not parse.
bool verify_password(std::string_view password, std::string_view verifier);

} // namespace mylib::crypto
