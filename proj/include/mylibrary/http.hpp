#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mylibrary/config.hpp"

namespace mylib {

inline constexpr const char *kSessionCookie = "mylib_session";
inline constexpr const char *kAdminCookie = "mylib_admin";

enum class RouteGuard { none, user, admin };

struct RouteInfo {
    std::string method;
    /// httplib pattern, ":name" marks a path parameter.
    std::string pattern;
    RouteGuard guard;
};

/// JSON-over-HTTP front end for the portal and admin services.
class HttpServer {
public:
    /// `access_log` receives one Common Log Format line per request; may be null.
    HttpServer(Services &services, std::ostream *access_log);
    ~HttpServer();
    HttpServer(const HttpServer &) = delete;
    HttpServer &operator=(const HttpServer &) = delete;

    /// Port 0 picks a free port. Returns the bound port; throws Error(io_error).
    int bind(const std::string &host, int port);
    /// Serves until stop(). Call bind() first.
    void run();
    /// run() on a background thread; returns once the server accepts connections.
    void start();
    void stop();

    const std::vector<RouteInfo> &routes() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mylib
