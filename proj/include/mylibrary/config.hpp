#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>

#include "mylibrary/admin.hpp"
#include "mylibrary/alerts.hpp"
#include "mylibrary/auth.hpp"
#include "mylibrary/mail.hpp"
#include "mylibrary/portal.hpp"
#include "mylibrary/session.hpp"
#include "mylibrary/store.hpp"

namespace mylib {

struct Config {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::filesystem::path data_dir = "data";
    /// Empty means data_dir/access.log.
    std::filesystem::path access_log;
    std::size_t snapshot_interval = 1000;

    /// "stub" or "signed"
    std::string auth_mode = "stub";
    std::string auth_login_url = "/login";
    std::string auth_secret;
    bool secure_cookies = false;

    /// "stdout", "spool" or "smtp"
    std::string mail_transport = "spool";
    /// Empty means data_dir/outbox.
    std::filesystem::path spool_dir;
    SmtpOptions smtp;
    std::string mail_from = "MyLibrary <mylibrary@localhost>";

    int timezone_offset_minutes = 0;
    PortalOptions portal;
    /// Served under /ui when set.
    std::filesystem::path static_dir;

    std::filesystem::path resolved_access_log() const;
    std::filesystem::path resolved_spool_dir() const;
};

/// Reads a JSON config file. Unknown keys are rejected so typos surface.
Config load_config(const std::filesystem::path &path);
Config config_from_json(const Json &j);

/// Everything a running instance needs, wired together.
struct Services {
    Config config;
    Clock clock;
    std::unique_ptr<Store> store;
    std::unique_ptr<SessionTable> sessions;
    std::unique_ptr<Authenticator> authenticator;
    std::shared_ptr<MailDispatcher> mail;
    std::unique_ptr<AlertService> alerts;
    std::unique_ptr<Portal> portal;
    std::unique_ptr<AdminService> admin;
};

inline constexpr std::chrono::seconds kUserSessionLifetime = std::chrono::hours(24 * 30);

/// `store` and `transport` override what the config would open.
std::unique_ptr<Services> make_services(Config config, Clock clock, std::unique_ptr<Store> store = nullptr,
                                        std::shared_ptr<MailTransport> transport = nullptr);

} // namespace mylib
