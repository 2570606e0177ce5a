#include "mylibrary/auth.hpp"

#include <cctype>
#include <charconv>

#include "mylibrary/crypto.hpp"
#include "mylibrary/error.hpp"

namespace mylib {

namespace {

std::string WithReturnTo(const std::string &base, std::string_view return_to) {
    if (return_to.empty())
        return base;
    return base + (base.find('?') == std::string::npos ? "?" : "&") + "return_to=" + percent_encode(return_to);
}

class StubAuthenticator final : public Authenticator {
public:
    explicit StubAuthenticator(std::string url) : url_(std::move(url)) {}

    std::string login_url(std::string_view return_to) const override { return WithReturnTo(url_, return_to); }

    std::string verify(std::string_view assertion) const override {
        if (!is_valid_auth_id(assertion))
            throw Error(Errc::authentication_failed, "malformed assertion");
        return std::string(assertion);
    }

private:
    std::string url_;
};

class SignedAuthenticator final : public Authenticator {
public:
    SignedAuthenticator(std::string url, std::string secret, Clock clock)
        : url_(std::move(url)), secret_(std::move(secret)), clock_(std::move(clock)) {}

    std::string login_url(std::string_view return_to) const override { return WithReturnTo(url_, return_to); }

    std::string verify(std::string_view assertion) const override {
        const auto bar1 = assertion.find('|');
        const auto bar2 = bar1 == std::string_view::npos ? bar1 : assertion.find('|', bar1 + 1);
        if (bar2 == std::string_view::npos)
            throw Error(Errc::authentication_failed, "malformed assertion");
        const auto auth_id = assertion.substr(0, bar1);
        const auto expiry_text = assertion.substr(bar1 + 1, bar2 - bar1 - 1);
        const auto signature = assertion.substr(bar2 + 1);
        long long expiry = 0;
        if (!is_valid_auth_id(auth_id) ||
            std::from_chars(expiry_text.data(), expiry_text.data() + expiry_text.size(), expiry).ptr !=
                expiry_text.data() + expiry_text.size())
            throw Error(Errc::authentication_failed, "malformed assertion");
        const auto expected = crypto::hmac_sha256_hex(secret_, assertion.substr(0, bar2));
        if (!crypto::constant_time_equal(expected, signature))
            throw Error(Errc::authentication_failed, "bad assertion signature");
        if (clock_().time_since_epoch().count() >= expiry)
            throw Error(Errc::authentication_failed, "assertion expired");
        return std::string(auth_id);
    }

private:
    std::string url_;
    std::string secret_;
    Clock clock_;
};

bool IsUnreserved(unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
           c == '_' || c == '~';
}

} // namespace

std::unique_ptr<Authenticator> make_stub_authenticator(std::string login_url) {
    return std::make_unique<StubAuthenticator>(std::move(login_url));
}

std::unique_ptr<Authenticator> make_signed_authenticator(std::string login_url, std::string secret, Clock clock) {
    if (secret.empty())
        throw Error(Errc::invalid_argument, "signed authenticator needs a secret");
    return std::make_unique<SignedAuthenticator>(std::move(login_url), std::move(secret), std::move(clock));
}

std::string sign_assertion(std::string_view secret, std::string_view auth_id, Timestamp expiry) {
    std::string payload(auth_id);
    payload += '|';
    payload += std::to_string(expiry.time_since_epoch().count());
    return payload + "|" + crypto::hmac_sha256_hex(secret, payload);
}

bool is_valid_auth_id(std::string_view auth_id) noexcept {
    if (auth_id.empty() || auth_id.size() > 128)
        return false;
    for (unsigned char c : auth_id)
        if (!(std::isalnum(c) && c < 0x80) && c != '.' && c != '_' && c != '@' && c != '-')
            return false;
    return true;
}

std::string percent_encode(std::string_view text) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(text.size() * 3);
    for (unsigned char c : text) {
        if (IsUnreserved(c)) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 0xF];
        }
    }
    return out;
}

std::string percent_decode(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '%') {
            out += text[i];
            continue;
        }
        unsigned v = 0;
        const char *p = text.data() + i + 1;
        if (i + 2 >= text.size() || std::from_chars(p, p + 2, v, 16).ptr != p + 2)
            throw ParseError(i, "bad percent escape");
        out += static_cast<char>(v);
        i += 2;
    }
    return out;
}

} // namespace mylib
