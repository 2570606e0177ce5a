#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "mylibrary/codec.hpp"
#include "mylibrary/mail.hpp"
#include "mylibrary/store.hpp"

namespace mylib {

class AdminService;

/// Proof of a successful admin login. Only AdminService creates these.
class AdminSession {
public:
    const std::string &token() const { return token_; }
    const std::string &username() const { return username_; }
    Timestamp expires_at() const { return expires_at_; }

private:
    friend class AdminService;
    AdminSession(std::string token, std::string username, Timestamp expires_at)
        : token_(std::move(token)), username_(std::move(username)), expires_at_(expires_at) {}

    std::string token_;
    std::string username_;
    Timestamp expires_at_;
};

enum class EntityKind { discipline, librarian, resource, recommendation };

std::optional<EntityKind> parse_entity_kind(std::string_view name) noexcept;

struct Recipients {
    /// Distinct opted-in users with an address, ordered by id.
    std::vector<User> users;
    std::size_t skipped_opt_out = 0;
    std::size_t skipped_no_address = 0;
};

struct MassEmailReport {
    std::size_t recipients = 0;
    std::size_t skipped_opt_out = 0;
    std::size_t skipped_no_address = 0;
    std::size_t sent = 0;
    /// Handed to the retry queue.
    std::size_t queued = 0;
};

struct MassEmailJob {
    std::uint64_t id = 0;
    bool done = false;
    std::string error;
    MassEmailReport report;
};

void to_json(Json &j, const MassEmailReport &r);
void to_json(Json &j, const MassEmailJob &job);

struct AdminOptions {
    std::chrono::seconds session_lifetime = std::chrono::hours(4);
    std::string from_address = "MyLibrary <mylibrary@localhost>";
    std::size_t min_password_length = 8;
};

class AdminService {
public:
    AdminService(Store &store, std::shared_ptr<MailDispatcher> dispatcher, AdminOptions options, Clock clock);
    ~AdminService();

    void create_account(const std::string &username, const std::string &password);
    /// Throws Error(authentication_failed) with the same message for any bad pair.
    AdminSession login(const std::string &username, const std::string &password);
    std::optional<AdminSession> resolve(const std::string &token) const;
    void logout(const std::string &token);

    Json list(const AdminSession &, EntityKind kind) const;
    /// Creates when the payload has no id (or id 0), replaces otherwise.
    Json upsert(const AdminSession &, EntityKind kind, const Json &payload);
    DeletionReport remove(const AdminSession &, EntityKind kind, std::uint64_t id);
    /// Clears one recommendation set.
    DeletionReport remove_recommendations(const AdminSession &, DisciplineId discipline, Section section);
    std::vector<User> list_users(const AdminSession &) const;

    Message set_global_message(const AdminSession &, const std::string &body);
    Message set_discipline_message(const AdminSession &, DisciplineId discipline, const std::string &body);

    Recipients mass_email_recipients(const std::vector<DisciplineId> &disciplines) const;
    MassEmailReport mass_email(const AdminSession &, const std::vector<DisciplineId> &disciplines,
                               const std::string &subject, const std::string &body);
    /// Runs mass_email on a worker thread and returns a job to poll.
    std::uint64_t start_mass_email(const AdminSession &, std::vector<DisciplineId> disciplines, std::string subject,
                                   std::string body);
    std::optional<MassEmailJob> job(std::uint64_t id) const;
    void wait_for_jobs();

private:
    MassEmailReport SendMass(const std::vector<DisciplineId> &disciplines, const std::string &subject,
                             const std::string &body, std::uint64_t job);

    Store &store_;
    std::shared_ptr<MailDispatcher> dispatcher_;
    AdminOptions options_;
    Clock clock_;
    std::string dummy_verifier_;

    mutable std::mutex mu_;
    std::unordered_map<std::string, AdminSession> sessions_;
    std::map<std::uint64_t, MassEmailJob> jobs_;
    std::uint64_t next_job_ = 1;
    std::vector<std::thread> workers_;
};

} // namespace mylib
