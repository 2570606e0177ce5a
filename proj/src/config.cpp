#include "mylibrary/config.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include "mylibrary/error.hpp"

namespace mylib {

namespace {

void RejectUnknown(const Json &j, const char *where, std::initializer_list<const char *> known) {
    if (!j.is_object())
        throw Error(Errc::invalid_argument, std::string(where) + " must be an object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto &[key, value] : j.items())
        if (!allowed.contains(key))
            throw Error(Errc::invalid_argument, "unknown config key '" + std::string(where) + "." + key + "'");
}

template <class T>
void Read(const Json &j, const char *key, T &out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const Json::exception &) {
            throw Error(Errc::invalid_argument, std::string("config key '") + key + "' has the wrong type");
        }
    }
}

void ReadPath(const Json &j, const char *key, std::filesystem::path &out) {
    std::string s = out.string();
    Read(j, key, s);
    out = s;
}

} // namespace

std::filesystem::path Config::resolved_access_log() const {
    return access_log.empty() ? data_dir / "access.log" : access_log;
}

std::filesystem::path Config::resolved_spool_dir() const { return spool_dir.empty() ? data_dir / "outbox" : spool_dir; }

Config config_from_json(const Json &j) {
    Config c;
    RejectUnknown(j, "config",
                  {"listen", "data_dir", "access_log", "snapshot_interval", "auth", "mail", "timezone_offset_minutes",
                   "portal", "static_dir"});
    if (j.contains("listen")) {
        const auto &l = j.at("listen");
        RejectUnknown(l, "listen", {"host", "port"});
        Read(l, "host", c.listen_host);
        Read(l, "port", c.listen_port);
    }
    ReadPath(j, "data_dir", c.data_dir);
    ReadPath(j, "access_log", c.access_log);
    Read(j, "snapshot_interval", c.snapshot_interval);
    Read(j, "timezone_offset_minutes", c.timezone_offset_minutes);
    ReadPath(j, "static_dir", c.static_dir);
    if (j.contains("auth")) {
        const auto &a = j.at("auth");
        RejectUnknown(a, "auth", {"mode", "login_url", "secret", "secure_cookies"});
        Read(a, "mode", c.auth_mode);
        Read(a, "login_url", c.auth_login_url);
        Read(a, "secret", c.auth_secret);
        Read(a, "secure_cookies", c.secure_cookies);
    }
    if (j.contains("mail")) {
        const auto &m = j.at("mail");
        RejectUnknown(m, "mail", {"transport", "spool_dir", "from", "smtp"});
        Read(m, "transport", c.mail_transport);
        ReadPath(m, "spool_dir", c.spool_dir);
        Read(m, "from", c.mail_from);
        if (m.contains("smtp")) {
            const auto &s = m.at("smtp");
            RejectUnknown(s, "mail.smtp", {"url", "username", "password", "require_tls", "timeout_seconds"});
            Read(s, "url", c.smtp.url);
            Read(s, "username", c.smtp.username);
            Read(s, "password", c.smtp.password);
            Read(s, "require_tls", c.smtp.require_tls);
            Read(s, "timeout_seconds", c.smtp.timeout_seconds);
        }
    }
    if (j.contains("portal")) {
        const auto &p = j.at("portal");
        RejectUnknown(p, "portal", {"version", "contact", "reference_contact", "default_discipline", "window_weeks"});
        Read(p, "version", c.portal.version);
        Read(p, "contact", c.portal.contact);
        Read(p, "default_discipline", c.portal.default_discipline);
        Read(p, "window_weeks", c.portal.window_weeks);
        if (p.contains("reference_contact")) {
            const auto &r = p.at("reference_contact");
            RejectUnknown(r, "portal.reference_contact", {"name", "phone", "email"});
            Read(r, "name", c.portal.reference_contact.name);
            Read(r, "phone", c.portal.reference_contact.phone);
            Read(r, "email", c.portal.reference_contact.email);
        }
    }
    if (c.auth_mode != "stub" && c.auth_mode != "signed")
        throw Error(Errc::invalid_argument, "auth.mode must be \"stub\" or \"signed\"");
    if (c.mail_transport != "stdout" && c.mail_transport != "spool" && c.mail_transport != "smtp")
        throw Error(Errc::invalid_argument, "mail.transport must be \"stdout\", \"spool\" or \"smtp\"");
    c.portal.utc_offset = std::chrono::minutes(c.timezone_offset_minutes);
    return c;
}

Config load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot read config " + path.string());
    try {
        return config_from_json(Json::parse(in));
    } catch (const Json::parse_error &e) {
        throw Error(Errc::invalid_argument, "config " + path.string() + ": " + e.what());
    }
}

std::unique_ptr<Services> make_services(Config config, Clock clock, std::unique_ptr<Store> store,
                                        std::shared_ptr<MailTransport> transport) {
    auto s = std::make_unique<Services>();
    config.portal.utc_offset = std::chrono::minutes(config.timezone_offset_minutes);
    s->config = std::move(config);
    s->clock = clock;
    const auto &c = s->config;

    s->store = store ? std::move(store) : open_file_store(c.data_dir, {c.snapshot_interval});
    s->sessions = std::make_unique<SessionTable>(kUserSessionLifetime, true, clock);
    if (c.auth_mode == "signed")
        s->authenticator = make_signed_authenticator(c.auth_login_url, c.auth_secret, clock);
    else
        s->authenticator = make_stub_authenticator(c.auth_login_url);

    if (!transport) {
        if (c.mail_transport == "stdout")
            transport = make_stream_transport(std::cout);
        else if (c.mail_transport == "smtp")
            transport = make_smtp_transport(c.smtp);
        else
            transport = make_spool_transport(c.resolved_spool_dir());
    }
    s->mail = std::make_shared<MailDispatcher>(std::move(transport));

    s->alerts = std::make_unique<AlertService>(
        *s->store, s->mail, AlertOptions{std::chrono::minutes(c.timezone_offset_minutes), c.mail_from});
    s->portal = std::make_unique<Portal>(*s->store, *s->sessions, *s->authenticator, *s->alerts, c.portal, clock);
    AdminOptions admin;
    admin.from_address = c.mail_from;
    s->admin = std::make_unique<AdminService>(*s->store, s->mail, admin, clock);
    return s;
}

} // namespace mylib
