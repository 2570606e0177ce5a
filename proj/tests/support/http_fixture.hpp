#pragma once

#include <algorithm>
#include <memory>
#include <fstream>
#include <iterator>
#include <thread>
#include <sstream>
#include <string>

#include "httplib.h"
#include "mylibrary/config.hpp"
#include "mylibrary/http.hpp"
#include "support/fixtures.hpp"

namespace testing {

/// A running server on an ephemeral port backed by a memory store.
struct LiveServer {
    TempDir dir;
    ManualClock clock{At("2026-10-15T12:00:00Z")};
    std::shared_ptr<RecordingTransport> transport = std::make_shared<RecordingTransport>();
    std::unique_ptr<mylib::Services> services;
    std::ofstream log;
    std::unique_ptr<mylib::HttpServer> server;
    int port = 0;

    explicit LiveServer(mylib::Config config = {}) {
        config.data_dir = dir.path();
        log.open(dir.path() / "access.log");
        services = mylib::make_services(std::move(config), clock.clock(), mylib::make_memory_store(), transport);
        server = std::make_unique<mylib::HttpServer>(*services, &log);
        port = server->bind("127.0.0.1", 0);
        server->start();
    }
    ~LiveServer() { server->stop(); }

    /// The access log once it holds at least `lines` lines. Lines are written
    /// after the response goes out, so a client can get ahead of the log.
    std::string LogText(std::size_t lines) {
        for (int i = 0; i < 500; ++i) {
            std::ifstream in(dir.path() / "access.log");
            const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            if (static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) >= lines)
                return text;
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        return {};
    }

    httplib::Client Client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_follow_location(false);
        c.set_keep_alive(false);
        return c;
    }

    /// Value of `name` from a Set-Cookie header, or "" when absent.
    static std::string CookieValue(const httplib::Result &res, const std::string &name) {
        if (!res || !res->has_header("Set-Cookie"))
            return {};
        const auto header = res->get_header_value("Set-Cookie");
        const auto prefix = name + "=";
        if (!header.starts_with(prefix))
            return {};
        return header.substr(prefix.size(), header.find(';') - prefix.size());
    }

    /// Logs in through the stub authenticator and returns the session token.
    std::string Login(const std::string &auth_id, const std::string &discipline = "") {
        auto c = Client();
        std::string path = "/login?assertion=" + auth_id + "&email=" + auth_id + "%40example.edu";
        if (!discipline.empty())
            path += "&discipline=" + discipline;
        return CookieValue(c.Get(path), mylib::kSessionCookie);
    }

    std::string AdminLogin(const std::string &username = "root", const std::string &password = "correct horse") {
        if (!services->store->find_admin_account(username))
            services->admin->create_account(username, password);
        auto c = Client();
        const mylib::Json body{{"username", username}, {"password", password}};
        const auto res = c.Post("/admin/login", body.dump(), "application/json");
        if (!res || res->status != 200)
            return {};
        return mylib::Json::parse(res->body).at("token").get<std::string>();
    }

    static httplib::Headers WithCookie(const std::string &token) {
        return {{"Cookie", std::string(mylib::kSessionCookie) + "=" + token}};
    }
    static httplib::Headers WithBearer(const std::string &token) { return {{"Authorization", "Bearer " + token}}; }
};

/// Concrete path for a route pattern.
inline std::string ConcretePath(const std::string &pattern) {
    std::string out;
    std::size_t i = 0;
    while (i < pattern.size()) {
        if (pattern[i] == ':') {
            const auto end = pattern.find('/', i);
            const auto name = pattern.substr(i + 1, end == std::string::npos ? std::string::npos : end - i - 1);
            out += name == "section" ? "library_links" : name == "kind" ? "disciplines" : "1";
            i = end == std::string::npos ? pattern.size() : end;
        } else {
            out += pattern[i++];
        }
    }
    return out;
}

inline httplib::Result Send(httplib::Client &c, const std::string &method, const std::string &path,
                            const httplib::Headers &headers, const std::string &body = "{}") {
    if (method == "GET")
        return c.Get(path, headers);
    if (method == "DELETE")
        return c.Delete(path, headers);
    return c.Post(path, headers, body, "application/json");
}

} // namespace testing
