#include "mylibrary/http.hpp"

#include <charconv>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "httplib.h"

#include <spdlog/spdlog.h>

#include "mylibrary/error.hpp"
#include "mylibrary/usage.hpp"

namespace mylib {

namespace {

using httplib::Request;
using httplib::Response;

int StatusFor(Errc code) {
    switch (code) {
    case Errc::invalid_argument:
    case Errc::parse_error:
        return 400;
    case Errc::authentication_failed:
        return 401;
    case Errc::forbidden:
        return 403;
    case Errc::not_found:
        return 404;
    case Errc::conflict:
    case Errc::refused:
        return 409;
    case Errc::busy:
        return 503;
    case Errc::io_error:
        return 500;
    }
    return 500;
}

void SendJson(Response &res, int status, const Json &body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

std::string ErrorName(Errc code) {
    std::string name(to_string(code));
    std::replace(name.begin(), name.end(), '-', '_');
    return name;
}

void SendError(Response &res, const Error &e) {
    Json body{{"error", ErrorName(e.code())}, {"message", e.what()}};
    if (const auto *v = dynamic_cast<const ValidationError *>(&e))
        body["violations"] = v->violations();
    if (const auto *r = dynamic_cast<const ReferencedError *>(&e))
        body["counts"] = r->counts();
    if (const auto *p = dynamic_cast<const ParseError *>(&e)) {
        body["offset"] = p->offset();
        body["error"] = ErrorName(Errc::invalid_argument);
    }
    SendJson(res, StatusFor(e.code()), body);
}

std::string Cookie(const Request &req, std::string_view name) {
    const auto header = req.get_header_value("Cookie");
    std::string_view rest = header;
    while (!rest.empty()) {
        const auto semi = rest.find(';');
        auto pair = rest.substr(0, semi);
        rest.remove_prefix(semi == std::string_view::npos ? rest.size() : semi + 1);
        while (!pair.empty() && pair.front() == ' ')
            pair.remove_prefix(1);
        const auto eq = pair.find('=');
        if (eq != std::string_view::npos && pair.substr(0, eq) == name)
            return std::string(pair.substr(eq + 1));
    }
    return {};
}

std::string BearerToken(const Request &req) {
    const auto auth = req.get_header_value("Authorization");
    constexpr std::string_view kPrefix = "Bearer ";
    return auth.starts_with(kPrefix) ? auth.substr(kPrefix.size()) : std::string{};
}

std::uint64_t ParseId(const std::string &text, const char *what) {
    std::uint64_t v = 0;
    const auto *end = text.data() + text.size();
    if (text.empty() || std::from_chars(text.data(), end, v).ptr != end || v == 0)
        throw Error(Errc::invalid_argument, std::string("bad ") + what + " '" + text + "'");
    return v;
}

unsigned ParseWeeks(const Request &req, const char *key, unsigned fallback) {
    if (!req.has_param(key))
        return fallback;
    const auto text = req.get_param_value(key);
    unsigned v = 0;
    const auto *end = text.data() + text.size();
    if (text.empty() || std::from_chars(text.data(), end, v).ptr != end || v > 520)
        throw Error(Errc::invalid_argument, std::string("bad ") + key + " '" + text + "'");
    return v;
}

Json Body(const Request &req) {
    if (req.body.empty())
        return Json::object();
    try {
        return Json::parse(req.body);
    } catch (const Json::parse_error &e) {
        throw Error(Errc::invalid_argument, std::string("request body is not JSON: ") + e.what());
    }
}

// "/x" but not "//host" or anything absolute.
bool IsLocalPath(std::string_view p) {
    return p.starts_with('/') && !p.starts_with("//") && p.find('\\') == std::string_view::npos &&
           p.find_first_of("\r\n") == std::string_view::npos;
}

std::vector<ResourceId> ResourceIds(const Json &body) {
    const Json &list = body.is_array() ? body : body.value("resource_ids", Json::array());
    if (!list.is_array())
        throw ValidationError({"resource_ids must be an array"});
    std::vector<ResourceId> ids;
    for (const auto &v : list) {
        if (!v.is_number_unsigned())
            throw ValidationError({"resource ids must be positive integers"});
        ids.push_back(ResourceId{v.get<std::uint64_t>()});
    }
    return ids;
}

Json ToJson(const DispatchResult &r) {
    return std::visit([](const auto &v) { return Json(v); }, r);
}

Json ToJson(const AlertItem &item) {
    return Json{{"call_number", item.call_number},
                {"author", item.author},
                {"title", item.title},
                {"record_url", item.record_url}};
}

} // namespace

struct HttpServer::Impl {
    Services &services;
    std::ostream *access_log;
    std::mutex log_mu;
    httplib::Server server;
    std::vector<RouteInfo> routes;
    std::thread thread;
    bool bound = false;

    using UserHandler = std::function<void(const Request &, Response &, const Session &)>;
    using AdminHandler = std::function<void(const Request &, Response &, const AdminSession &)>;
    using PlainHandler = std::function<void(const Request &, Response &)>;

    Impl(Services &s, std::ostream *log) : services(s), access_log(log) {
        server.set_logger([this](const Request &req, const Response &res) { Log(req, res); });
        server.set_exception_handler([](const Request &, Response &res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception &e) {
                spdlog::error("unhandled: {}", e.what());
            } catch (...) {
            }
            SendJson(res, 500, Json{{"error", "io_error"}, {"message", "internal error"}});
        });
        server.set_default_headers({{"Cache-Control", "no-store"}});
        if (!services.config.static_dir.empty())
            server.set_mount_point("/ui", services.config.static_dir.string());
        RegisterPortal();
        RegisterAdmin();
        server.set_error_handler([](const Request &, Response &res) {
            if (res.body.empty())
                SendJson(res, res.status, Json{{"error", res.status == 404 ? "not_found" : "error"},
                                               {"message", httplib::status_message(res.status)}});
        });
    }

    std::string SessionCookie(const std::string &token, std::chrono::seconds max_age) const {
        std::string c = std::string(kSessionCookie) + "=" + token + "; Path=/; HttpOnly; SameSite=Lax; Max-Age=" +
                        std::to_string(max_age.count());
        if (services.config.secure_cookies)
            c += "; Secure";
        return c;
    }

    void Log(const Request &req, const Response &res) {
        if (!access_log)
            return;
        ClfEntry e;
        e.host = req.remote_addr.empty() ? "-" : req.remote_addr;
        e.ident = "-";
        e.authuser = "-";
        auto token = Cookie(req, kSessionCookie);
        auto session = services.sessions->peek(token);
        if (!session) {
            const auto set = res.get_header_value("Set-Cookie");
            const std::string prefix = std::string(kSessionCookie) + "=";
            if (set.starts_with(prefix))
                session = services.sessions->peek(set.substr(prefix.size(), set.find(';') - prefix.size()));
        }
        if (session)
            if (const auto user = services.store->find_user(session->user_id))
                e.authuser = user->auth_id;
        e.at = services.clock();
        e.method = req.method;
        e.target = req.target.empty() ? req.path : req.target;
        e.protocol = req.version.empty() ? "HTTP/1.1" : req.version;
        e.status = res.status;
        e.bytes = res.body.size();
        const auto line = format_clf_line(e);
        std::lock_guard lock(log_mu);
        *access_log << line << '\n' << std::flush;
    }

    void Route(const std::string &method, const std::string &pattern, RouteGuard guard, PlainHandler h) {
        routes.push_back({method, pattern, guard});
        auto wrapped = [h = std::move(h)](const Request &req, Response &res) {
            try {
                h(req, res);
            } catch (const Error &e) {
                SendError(res, e);
            }
        };
        if (method == "GET")
            server.Get(pattern, wrapped);
        else if (method == "POST")
            server.Post(pattern, wrapped);
        else if (method == "DELETE")
            server.Delete(pattern, wrapped);
        else
            throw Error(Errc::invalid_argument, "unsupported method " + method);
    }

    void User(const std::string &method, const std::string &pattern, UserHandler h) {
        Route(method, pattern, RouteGuard::user, [this, h = std::move(h)](const Request &req, Response &res) {
            const auto resolved = services.portal->resolve_session(Cookie(req, kSessionCookie), std::nullopt, {},
                                                                   req.method == "GET" ? req.target : "/page");
            if (const auto *redirect = std::get_if<AuthRedirect>(&resolved)) {
                res.set_redirect(redirect->location, 302);
                SendJson(res, 302, Json{{"error", "authentication_required"}, {"location", redirect->location}});
                return;
            }
            const auto &session = std::get<Resolved>(resolved).session;
            res.set_header("Set-Cookie", SessionCookie(session.token, services.sessions->lifetime()));
            h(req, res, session);
        });
    }

    void Admin(const std::string &method, const std::string &pattern, AdminHandler h) {
        Route(method, pattern, RouteGuard::admin, [this, h = std::move(h)](const Request &req, Response &res) {
            auto token = BearerToken(req);
            if (token.empty())
                token = Cookie(req, kAdminCookie);
            const auto session = services.admin->resolve(token);
            if (!session) {
                SendJson(res, 401, Json{{"error", "authentication_failed"}, {"message", "admin login required"}});
                return;
            }
            h(req, res, *session);
        });
    }

    void RegisterPortal() {
        auto &portal = *services.portal;

        Route("GET", "/login", RouteGuard::none, [this, &portal](const Request &req, Response &res) {
            std::optional<std::string> assertion;
            if (req.has_param("assertion"))
                assertion = req.get_param_value("assertion");
            const auto return_to = req.get_param_value("return_to");
            Onboarding onboarding{req.get_param_value("name"), req.get_param_value("email"),
                                  req.get_param_value("discipline")};
            const auto resolved =
                portal.resolve_session(Cookie(req, kSessionCookie), assertion, onboarding, return_to);
            if (const auto *redirect = std::get_if<AuthRedirect>(&resolved)) {
                res.set_redirect(redirect->location, 302);
                SendJson(res, 302, Json{{"error", "authentication_required"}, {"location", redirect->location}});
                return;
            }
            const auto &r = std::get<Resolved>(resolved);
            res.set_header("Set-Cookie", SessionCookie(r.session.token, services.sessions->lifetime()));
            if (r.fresh && IsLocalPath(return_to)) {
                res.set_redirect(return_to, 302);
                return;
            }
            SendJson(res, 200,
                     Json{{"user", *services.store->find_user(r.session.user_id)},
                          {"created", r.created_account},
                          {"expires_at", timestamp_json(r.session.expires_at)}});
        });

        Route("POST", "/logout", RouteGuard::none, [this, &portal](const Request &req, Response &res) {
            portal.logout(Cookie(req, kSessionCookie));
            res.set_header("Set-Cookie", SessionCookie("", std::chrono::seconds(0)));
            SendJson(res, 200, Json{{"logged_out", true}});
        });

        User("GET", "/page", [&portal](const Request &, Response &res, const Session &s) {
            SendJson(res, 200, portal.assemble_page(s.user_id));
        });

        User("GET", "/me", [this](const Request &, Response &res, const Session &s) {
            SendJson(res, 200, *services.store->find_user(s.user_id));
        });

        User("GET", "/disciplines", [this](const Request &, Response &res, const Session &) {
            SendJson(res, 200, services.store->list_disciplines());
        });

        // The program-style entry point: command=get|set|anything.
        User("POST", "/dispatch", [&portal](const Request &req, Response &res, const Session &s) {
            const auto body = Body(req);
            DispatchArgs args;
            args.section = body.value("section", "");
            if (body.contains("resource_ids"))
                args.resource_ids = ResourceIds(body);
            if (body.contains("discipline"))
                args.discipline_filter = DisciplineId{body.at("discipline").get<std::uint64_t>()};
            SendJson(res, 200, ToJson(portal.dispatch(s.user_id, body.value("command", "display"), args)));
        });

        User("GET", "/customize/:section", [&portal](const Request &req, Response &res, const Session &s) {
            DispatchArgs args{req.path_params.at("section"), {}, std::nullopt};
            if (req.has_param("discipline"))
                args.discipline_filter = DisciplineId{ParseId(req.get_param_value("discipline"), "discipline")};
            SendJson(res, 200, ToJson(portal.dispatch(s.user_id, "get", args)));
        });

        User("POST", "/customize/:section", [&portal](const Request &req, Response &res, const Session &s) {
            DispatchArgs args{req.path_params.at("section"), ResourceIds(Body(req)), std::nullopt};
            SendJson(res, 200, ToJson(portal.dispatch(s.user_id, "set", args)));
        });

        User("POST", "/personal-links", [&portal](const Request &req, Response &res, const Session &s) {
            const auto body = Body(req);
            SendJson(res, 201,
                     portal.add_personal_link(s.user_id, body.value("title", ""), body.value("url", "")));
        });

        User("DELETE", "/personal-links/:id", [&portal](const Request &req, Response &res, const Session &s) {
            portal.delete_personal_link(s.user_id, ResourceId{ParseId(req.path_params.at("id"), "link id")});
            res.status = 204;
        });

        User("GET", "/quick-search", [&portal](const Request &req, Response &res, const Session &s) {
            const auto engine = ResourceId{ParseId(req.get_param_value("engine"), "engine")};
            const auto url = portal.quick_search(s.user_id, engine, req.get_param_value("q"));
            res.set_redirect(url, 302);
        });

        User("POST", "/discipline", [&portal](const Request &req, Response &res, const Session &s) {
            const auto body = Body(req);
            const auto id = required<DisciplineId>(body, "discipline_id");
            SendJson(res, 200, portal.set_discipline(s.user_id, id));
        });

        User("POST", "/preferences", [&portal](const Request &req, Response &res, const Session &s) {
            const auto body = Body(req);
            std::optional<bool> opt_in;
            std::optional<std::string> name, email;
            if (body.contains("email_opt_in"))
                opt_in = required<bool>(body, "email_opt_in");
            if (body.contains("name"))
                name = required<std::string>(body, "name");
            if (body.contains("email"))
                email = required<std::string>(body, "email");
            SendJson(res, 200, portal.set_preferences(s.user_id, opt_in, name, email));
        });

        User("GET", "/current-awareness/profiles", [this](const Request &, Response &res, const Session &s) {
            SendJson(res, 200, services.store->profiles_for(s.user_id));
        });

        User("POST", "/current-awareness/profiles", [&portal](const Request &req, Response &res, const Session &s) {
            const auto body = Body(req);
            const auto delivery = optional_field(body, "delivery", Delivery::screen);
            SendJson(res, 201, portal.save_profile(s.user_id, required<std::string>(body, "ranges"), delivery));
        });

        User("DELETE", "/current-awareness/profiles/:id",
             [&portal](const Request &req, Response &res, const Session &s) {
                 portal.delete_profile(s.user_id, ProfileId{ParseId(req.path_params.at("id"), "profile id")});
                 res.status = 204;
             });

        User("GET", "/current-awareness/search", [&portal](const Request &req, Response &res, const Session &s) {
            const TimeWindow window{ParseWeeks(req, "from", 2), ParseWeeks(req, "to", 0)};
            std::optional<ProfileId> profile;
            if (req.has_param("profile"))
                profile = ProfileId{ParseId(req.get_param_value("profile"), "profile")};
            auto output = Delivery::screen;
            if (req.has_param("output")) {
                const auto parsed = parse_delivery(req.get_param_value("output"));
                if (!parsed)
                    throw Error(Errc::invalid_argument, "output must be screen or email");
                output = *parsed;
            }
            const auto result = portal.current_awareness_search(s.user_id, window, profile, output);
            Json items = Json::array();
            for (const auto &item : result.items)
                items.push_back(ToJson(item));
            SendJson(res, 200,
                     Json{{"from", format_date(result.dates.start)},
                          {"until", format_date(result.dates.end)},
                          {"items", std::move(items)},
                          {"output", output},
                          {"emailed", result.emailed},
                          {"queued", result.queued}});
        });
    }

    void RegisterAdmin() {
        auto &admin = *services.admin;

        Route("POST", "/admin/login", RouteGuard::none, [this, &admin](const Request &req, Response &res) {
            const auto body = Body(req);
            const auto s = admin.login(body.value("username", ""), body.value("password", ""));
            std::string cookie = std::string(kAdminCookie) + "=" + s.token() + "; Path=/admin; HttpOnly; SameSite=Strict";
            if (services.config.secure_cookies)
                cookie += "; Secure";
            res.set_header("Set-Cookie", cookie);
            SendJson(res, 200, Json{{"token", s.token()}, {"expires_at", timestamp_json(s.expires_at())}});
        });

        Admin("POST", "/admin/logout", [&admin](const Request &, Response &res, const AdminSession &s) {
            admin.logout(s.token());
            res.set_header("Set-Cookie", std::string(kAdminCookie) + "=; Path=/admin; HttpOnly; Max-Age=0");
            SendJson(res, 200, Json{{"logged_out", true}});
        });

        Admin("GET", "/admin/users", [&admin](const Request &, Response &res, const AdminSession &s) {
            SendJson(res, 200, admin.list_users(s));
        });

        Admin("GET", "/admin/messages", [this](const Request &, Response &res, const AdminSession &) {
            SendJson(res, 200, services.store->message_history());
        });

        Admin("POST", "/admin/messages/global", [&admin](const Request &req, Response &res, const AdminSession &s) {
            SendJson(res, 200, admin.set_global_message(s, required<std::string>(Body(req), "body")));
        });

        Admin("POST", "/admin/messages/discipline/:id",
              [&admin](const Request &req, Response &res, const AdminSession &s) {
                  const DisciplineId d{ParseId(req.path_params.at("id"), "discipline id")};
                  SendJson(res, 200, admin.set_discipline_message(s, d, required<std::string>(Body(req), "body")));
              });

        Admin("POST", "/admin/mass-email", [&admin](const Request &req, Response &res, const AdminSession &s) {
            const auto body = Body(req);
            const auto ids = required<std::vector<DisciplineId>>(body, "discipline_ids");
            const auto subject = required<std::string>(body, "subject");
            const auto text = required<std::string>(body, "body");
            if (optional_field(body, "wait", false)) {
                SendJson(res, 200, admin.mass_email(s, ids, subject, text));
                return;
            }
            const auto job = admin.start_mass_email(s, ids, subject, text);
            SendJson(res, 202, Json{{"id", job}, {"state", "running"}, {"poll", "/admin/mass-email/" + std::to_string(job)}});
        });

        Admin("GET", "/admin/mass-email/:id", [&admin](const Request &req, Response &res, const AdminSession &) {
            const auto job = admin.job(ParseId(req.path_params.at("id"), "job id"));
            if (!job)
                throw Error(Errc::not_found, "no such job");
            SendJson(res, 200, *job);
        });

        Admin("GET", "/admin/reports", [this](const Request &req, Response &res, const AdminSession &) {
            UsagePeriod period;
            if (req.has_param("from"))
                period.from = parse_timestamp(req.get_param_value("from"));
            if (req.has_param("to"))
                period.to = parse_timestamp(req.get_param_value("to"));
            std::ifstream log(services.config.resolved_access_log());
            SendJson(res, 200, usage_report(log, period));
        });

        Admin("DELETE", "/admin/recommendations/:discipline/:section",
              [&admin](const Request &req, Response &res, const AdminSession &s) {
                  const DisciplineId d{ParseId(req.path_params.at("discipline"), "discipline id")};
                  const auto section = parse_section(req.path_params.at("section"));
                  if (!section)
                      throw Error(Errc::invalid_argument, "unknown section");
                  SendJson(res, 200, admin.remove_recommendations(s, d, *section));
              });

        Admin("GET", "/admin/:kind", [&admin](const Request &req, Response &res, const AdminSession &s) {
            SendJson(res, 200, admin.list(s, Kind(req)));
        });

        Admin("POST", "/admin/:kind", [&admin](const Request &req, Response &res, const AdminSession &s) {
            const auto body = Body(req);
            const auto kind = Kind(req);
            const bool create =
                kind != EntityKind::recommendation && (!body.contains("id") || body.at("id") == 0);
            SendJson(res, create ? 201 : 200, admin.upsert(s, kind, body));
        });

        Admin("DELETE", "/admin/:kind/:id", [&admin](const Request &req, Response &res, const AdminSession &s) {
            SendJson(res, 200, admin.remove(s, Kind(req), ParseId(req.path_params.at("id"), "id")));
        });
    }

    static EntityKind Kind(const Request &req) {
        const auto kind = parse_entity_kind(req.path_params.at("kind"));
        if (!kind)
            throw Error(Errc::not_found, "unknown admin collection '" + req.path_params.at("kind") + "'");
        return *kind;
    }
};

HttpServer::HttpServer(Services &services, std::ostream *access_log)
    : impl_(std::make_unique<Impl>(services, access_log)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
    int bound = -1;
    if (port == 0)
        bound = impl_->server.bind_to_any_port(host);
    else if (impl_->server.bind_to_port(host, port))
        bound = port;
    if (bound < 0)
        throw Error(Errc::io_error, "cannot listen on " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound;
}

void HttpServer::run() {
    if (!impl_->bound)
        throw Error(Errc::invalid_argument, "bind() before run()");
    impl_->server.listen_after_bind();
}

void HttpServer::start() {
    if (!impl_->bound)
        throw Error(Errc::invalid_argument, "bind() before start()");
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable())
        impl_->thread.join();
}

const std::vector<RouteInfo> &HttpServer::routes() const { return impl_->routes; }

} // namespace mylib
