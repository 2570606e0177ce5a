#include "mylibrary/usage.hpp"

#include <charconv>
#include <istream>
#include <set>

#include <fmt/format.h>

#include "mylibrary/error.hpp"
#include "mylibrary/model.hpp"

namespace mylib {

namespace {

// Next space-delimited token; advances `s` past it and one space.
std::optional<std::string_view> Token(std::string_view &s) {
    if (s.empty() || s.front() == ' ')
        return std::nullopt;
    const auto sp = s.find(' ');
    const auto tok = s.substr(0, sp);
    s.remove_prefix(sp == std::string_view::npos ? s.size() : sp + 1);
    return tok;
}

std::optional<std::string_view> Delimited(std::string_view &s, char open, char close) {
    if (s.empty() || s.front() != open)
        return std::nullopt;
    std::size_t end = 1;
    while (end < s.size() && s[end] != close) {
        if (open == '"' && s[end] == '\\' && end + 1 < s.size())
            ++end;
        ++end;
    }
    if (end >= s.size())
        return std::nullopt;
    const auto inner = s.substr(1, end - 1);
    s.remove_prefix(end + 1);
    if (!s.empty()) {
        if (s.front() != ' ')
            return std::nullopt;
        s.remove_prefix(1);
    }
    return inner;
}

std::string_view Path(std::string_view target) {
    const auto q = target.find_first_of("?#");
    return target.substr(0, q);
}

std::optional<std::string_view> QueryParam(std::string_view target, std::string_view name) {
    const auto q = target.find('?');
    if (q == std::string_view::npos)
        return std::nullopt;
    std::size_t pos = q + 1;
    while (pos <= target.size()) {
        auto end = target.find('&', pos);
        if (end == std::string_view::npos)
            end = target.size();
        const auto pair = target.substr(pos, end - pos);
        const auto eq = pair.find('=');
        if (pair.substr(0, eq) == name)
            return eq == std::string_view::npos ? std::string_view{} : pair.substr(eq + 1);
        pos = end + 1;
    }
    return std::nullopt;
}

} // namespace

std::optional<ClfEntry> parse_clf_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
        line.remove_suffix(1);
    ClfEntry e;
    const auto host = Token(line);
    const auto ident = Token(line);
    const auto user = Token(line);
    if (!host || !ident || !user)
        return std::nullopt;
    const auto date = Delimited(line, '[', ']');
    const auto request = Delimited(line, '"', '"');
    const auto status = Token(line);
    const auto bytes = Token(line);
    if (!date || !request || !status || !bytes || !line.empty())
        return std::nullopt;
    e.host = *host;
    e.ident = *ident;
    e.authuser = *user;
    try {
        e.at = parse_clf_date(*date);
    } catch (const ParseError &) {
        return std::nullopt;
    }
    auto req = *request;
    const auto method = Token(req);
    const auto target = Token(req);
    if (!method || !target)
        return std::nullopt;
    e.method = *method;
    e.target = *target;
    e.protocol = req;
    if (std::from_chars(status->data(), status->data() + status->size(), e.status).ptr !=
            status->data() + status->size() ||
        e.status < 100 || e.status > 599)
        return std::nullopt;
    if (*bytes != "-") {
        std::size_t n = 0;
        if (std::from_chars(bytes->data(), bytes->data() + bytes->size(), n).ptr != bytes->data() + bytes->size())
            return std::nullopt;
        e.bytes = n;
    }
    return e;
}

std::string format_clf_line(const ClfEntry &e) {
    return fmt::format("{} {} {} [{}] \"{} {}{}{}\" {} {}", e.host, e.ident.empty() ? "-" : e.ident,
                       e.authuser.empty() ? "-" : e.authuser, clf_date(e.at), e.method, e.target,
                       e.protocol.empty() ? "" : " ", e.protocol, e.status, e.bytes ? std::to_string(*e.bytes) : "-");
}

std::string route_counter(std::string_view method, std::string_view target) {
    const auto path = Path(target);
    const bool get = method == "GET" || method == "HEAD";
    if (path == "/page" || path == "/")
        return "page";
    if (path.starts_with("/customize/")) {
        const auto section = path.substr(11);
        if (!parse_section(section))
            return "other";
        return fmt::format("customize.{}{}", section, get ? "" : ".set");
    }
    if (path == "/quick-search")
        return "quick_search";
    if (path == "/personal-links" || path.starts_with("/personal-links/"))
        return method == "DELETE" ? "personal_links.delete" : "personal_links.add";
    if (path == "/discipline")
        return "discipline";
    if (path == "/preferences")
        return "preferences";
    if (path == "/current-awareness/search")
        return "current_awareness.search";
    if (path == "/current-awareness/profiles" || path.starts_with("/current-awareness/profiles/"))
        return method == "DELETE" ? "current_awareness.profile.delete" : "current_awareness.profile.save";
    if (path == "/login")
        return "login";
    if (path == "/logout")
        return "logout";
    if (path == "/admin" || path.starts_with("/admin/"))
        return "admin";
    return "other";
}

UsageReport usage_report(std::istream &log, const UsagePeriod &period) {
    UsageReport r;
    r.period = period;
    std::set<std::string> users;
    std::string line;
    while (std::getline(log, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto e = parse_clf_line(line);
        if (!e) {
            ++r.malformed;
            continue;
        }
        if ((period.from && e->at < *period.from) || (period.to && e->at >= *period.to)) {
            ++r.outside_period;
            continue;
        }
        ++r.requests;
        const auto counter = route_counter(e->method, e->target);
        ++r.counters[counter];
        if (counter == "quick_search")
            if (const auto engine = QueryParam(e->target, "engine"))
                ++r.resource_hits[std::string(*engine)];
        if (e->authuser != "-")
            users.insert(e->authuser);
    }
    r.distinct_users = users.size();
    return r;
}

void to_json(Json &j, const UsageReport &r) {
    j = Json{{"from", r.period.from ? timestamp_json(*r.period.from) : Json(nullptr)},
             {"to", r.period.to ? timestamp_json(*r.period.to) : Json(nullptr)},
             {"counters", r.counters},
             {"resource_hits", r.resource_hits},
             {"distinct_users", r.distinct_users},
             {"requests", r.requests},
             {"malformed", r.malformed},
             {"outside_period", r.outside_period}};
}

} // namespace mylib
