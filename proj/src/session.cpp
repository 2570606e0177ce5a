#include "mylibrary/session.hpp"

#include "mylibrary/crypto.hpp"

namespace mylib {

SessionTable::SessionTable(std::chrono::seconds lifetime, bool sliding, Clock clock)
    : lifetime_(lifetime), sliding_(sliding), clock_(std::move(clock)) {}

Session SessionTable::issue(UserId user) {
    const auto now = clock_();
    Session s{crypto::random_hex(16), user, now, now + lifetime_};
    std::lock_guard lock(mu_);
    if (++issued_since_purge_ >= 1024) {
        PurgeExpired(now);
        issued_since_purge_ = 0;
    }
    sessions_[s.token] = s;
    return s;
}

std::optional<Session> SessionTable::resolve(const std::string &token) {
    if (token.empty())
        return std::nullopt;
    const auto now = clock_();
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(token);
    if (it == sessions_.end())
        return std::nullopt;
    if (it->second.expires_at <= now) {
        sessions_.erase(it);
        return std::nullopt;
    }
    if (sliding_)
        it->second.expires_at = now + lifetime_;
    return it->second;
}

std::optional<Session> SessionTable::peek(const std::string &token) const {
    const auto now = clock_();
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(token);
    if (it == sessions_.end() || it->second.expires_at <= now)
        return std::nullopt;
    return it->second;
}

void SessionTable::revoke(const std::string &token) {
    std::lock_guard lock(mu_);
    sessions_.erase(token);
}

std::size_t SessionTable::size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

void SessionTable::PurgeExpired(Timestamp now) {
    std::erase_if(sessions_, [&](const auto &kv) { return kv.second.expires_at <= now; });
}

} // namespace mylib
