#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>

#include "mylibrary/time.hpp"

namespace mylib {

struct MailMessage {
    std::string from;
    std::string to;
    std::string subject;
    /// Plain text, LF line endings.
    std::string body;
    Timestamp date{};
    /// Stable name for the message, used as the spool file stem and in Message-ID.
    std::string key;

    friend bool operator==(const MailMessage &, const MailMessage &) = default;
};

/// RFC 5322 text with CRLF line endings; a non-ASCII subject is RFC 2047 encoded.
std::string render_rfc5322(const MailMessage &message);

class MailTransport {
public:
    virtual ~MailTransport() = default;
    /// Throws Error(io_error) when the message was not handed off.
    virtual void send(const MailMessage &message) = 0;
};

std::unique_ptr<MailTransport> make_stream_transport(std::ostream &out);
/// Writes `{key}.eml` into `directory`, atomically.
std::unique_ptr<MailTransport> make_spool_transport(std::filesystem::path directory);

struct SmtpOptions {
    /// smtp://host:port or smtps://host:port
    std::string url;
    std::string username;
    std::string password;
    bool require_tls = true;
    long timeout_seconds = 30;
};
std::unique_ptr<MailTransport> make_smtp_transport(SmtpOptions options);

/// Sends through a transport and keeps failed messages for later attempts.
class MailDispatcher {
public:
    explicit MailDispatcher(std::shared_ptr<MailTransport> transport, std::size_t max_attempts = 5);

    /// True if sent now; false if queued for retry.
    bool deliver(const MailMessage &message);
    /// Retries everything queued once. Returns how many went through.
    std::size_t retry_pending();
    std::size_t pending() const;

private:
    struct Pending {
        MailMessage message;
        std::size_t attempts = 0;
    };

    std::shared_ptr<MailTransport> transport_;
    std::size_t max_attempts_;
    mutable std::mutex mu_;
    std::deque<Pending> queue_;
};

} // namespace mylib
