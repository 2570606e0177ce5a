#include "mylibrary/crypto.hpp"

#include <charconv>
#include <vector>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include "mylibrary/error.hpp"

namespace mylib::crypto {

namespace {

constexpr std::string_view kScheme = "pbkdf2-sha256";
constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kHashBytes = 32;

std::string Hex(const unsigned char *data, std::size_t n) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (std::size_t i = 0; i < n; ++i) {
        out[2 * i] = kDigits[data[i] >> 4];
        out[2 * i + 1] = kDigits[data[i] & 0xF];
    }
    return out;
}

bool Unhex(std::string_view hex, std::vector<unsigned char> &out) {
    if (hex.size() % 2 != 0)
        return false;
    out.resize(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        unsigned v = 0;
        const auto *p = hex.data() + 2 * i;
        if (std::from_chars(p, p + 2, v, 16).ptr != p + 2)
            return false;
        out[i] = static_cast<unsigned char>(v);
    }
    return true;
}

std::string Pbkdf2(std::string_view password, const std::vector<unsigned char> &salt, unsigned iterations) {
    unsigned char hash[kHashBytes];
    if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                          static_cast<int>(salt.size()), static_cast<int>(iterations), EVP_sha256(), kHashBytes,
                          hash) != 1)
        throw Error(Errc::io_error, "PBKDF2 failed");
    return Hex(hash, kHashBytes);
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    while (true) {
        const auto at = s.find(sep);
        parts.push_back(s.substr(0, at));
        if (at == std::string_view::npos)
            return parts;
        s.remove_prefix(at + 1);
    }
}

} // namespace

std::string random_hex(std::size_t bytes) {
    std::vector<unsigned char> buf(bytes);
    if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1)
        throw Error(Errc::io_error, "random number generator failure");
    return Hex(buf.data(), buf.size());
}

std::string hmac_sha256_hex(std::string_view key, std::string_view data) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), reinterpret_cast<const unsigned char *>(data.data()),
         data.size(), out, &len);
    return Hex(out, len);
}

bool constant_time_equal(std::string_view a, std::string_view b) noexcept {
    return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string make_password_verifier(std::string_view password, unsigned iterations) {
    std::vector<unsigned char> salt(kSaltBytes);
    if (RAND_bytes(salt.data(), static_cast<int>(salt.size())) != 1)
        throw Error(Errc::io_error, "random number generator failure");
    return std::string(kScheme) + "$" + std::to_string(iterations) + "$" + Hex(salt.data(), salt.size()) + "$" +
           Pbkdf2(password, salt, iterations);
}

bool verify_password(std::string_view password, std::string_view verifier) {
    const auto parts = Split(verifier, '$');
    if (parts.size() != 4 || parts[0] != kScheme)
        return false;
    unsigned iterations = 0;
    if (std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), iterations).ec != std::errc{} ||
        iterations == 0)
        return false;
    std::vector<unsigned char> salt;
    if (!Unhex(parts[2], salt))
        return false;
    return constant_time_equal(Pbkdf2(password, salt, iterations), parts[3]);
}

} // namespace mylib::crypto
