#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "mylibrary/ids.hpp"
#include "mylibrary/time.hpp"

namespace mylib {

struct Session {
    std::string token;
    UserId user_id;
    Timestamp issued_at{};
    Timestamp expires_at{};
};

/// In-memory token table. Tokens are 128 random bits, hex encoded.
///
/// With `sliding` set, each successful resolve pushes the expiry out by the
/// full lifetime again.
class SessionTable {
public:
    SessionTable(std::chrono::seconds lifetime, bool sliding, Clock clock);

    Session issue(UserId user);
    std::optional<Session> resolve(const std::string &token);
    /// Like resolve, without extending the expiry.
    std::optional<Session> peek(const std::string &token) const;
    /// Idempotent.
    void revoke(const std::string &token);
    std::size_t size() const;

    std::chrono::seconds lifetime() const { return lifetime_; }

private:
    void PurgeExpired(Timestamp now);

    std::chrono::seconds lifetime_;
    bool sliding_;
    Clock clock_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, Session> sessions_;
    std::size_t issued_since_purge_ = 0;
};

} // namespace mylib
